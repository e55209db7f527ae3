use std::process::ExitCode;

fn main() -> ExitCode {
    pulsechat_server::cli::main()
}
