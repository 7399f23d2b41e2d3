fn main() -> std::process::ExitCode {
    fcikit::cli::main()
}
