fn main() -> std::process::ExitCode {
    diachron::cli::main()
}
