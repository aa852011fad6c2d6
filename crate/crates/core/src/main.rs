fn main() -> std::process::ExitCode {
    pcat::cli::main()
}
