fn main() -> std::process::ExitCode {
    zxcontract::cli::main_with_args(std::env::args_os())
}
