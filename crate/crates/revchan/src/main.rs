fn main() -> std::process::ExitCode {
    revchan::cli::run()
}
