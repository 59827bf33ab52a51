use std::process::ExitCode;

fn main() -> ExitCode {
    match cuesync::cli::run(std::env::args_os()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("cuesync: {e}");
            ExitCode::FAILURE
        }
    }
}
