fn main() -> std::process::ExitCode {
    omninav::cli::main()
}
