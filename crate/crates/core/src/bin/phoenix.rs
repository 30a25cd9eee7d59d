fn main() -> std::process::ExitCode {
    phoenix_core::cli::main()
}
