use clap::Parser;

fn main() {
    let cli = gnprep::cli::Cli::parse();
    match gnprep::cli::run(&cli) {
        Ok(text) => {
            if !text.is_empty() {
                print!("{text}");
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(1);
        }
    }
}
