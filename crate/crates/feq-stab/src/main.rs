use clap::error::ErrorKind;
use clap::Parser;

use feq_stab::{args::exits, Cli};

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            // --help/--version land here too and must exit 0; genuine usage
            // errors take a code outside the pipeline's result range.
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => exits::USAGE,
            };
            let _ = err.print();
            std::process::exit(i32::from(code));
        }
    };
    match feq_stab::dispatch(cli) {
        Ok(code) => std::process::exit(i32::from(code)),
        Err(err) => {
            eprintln!("error: {err}");
            std::process::exit(i32::from(err.exit_code()));
        }
    }
}
