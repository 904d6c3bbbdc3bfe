use clap::Parser;
use gravchan_cli::{run, Cli};

fn main() {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(summary) => println!("{}", summary.display()),
        Err(e) => {
            eprintln!("gravchan: {e}");
            std::process::exit(e.exit_code());
        }
    }
}
