use std::io::Write;

fn main() {
    let outcome = tarski_core::cli::run(std::env::args_os());
    let text = outcome.report.as_bytes();
    let written = if outcome.exit_code == tarski_core::cli::EXIT_USAGE {
        std::io::stderr().write_all(text)
    } else {
        std::io::stdout().write_all(text)
    };
    if written.is_err() {
        std::process::exit(tarski_core::cli::EXIT_FAILED);
    }
    std::process::exit(outcome.exit_code);
}
