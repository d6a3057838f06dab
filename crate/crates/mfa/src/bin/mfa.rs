use clap::Parser;

fn main() {
    let cli = mfa::cli::Cli::parse();
    std::process::exit(mfa::cli::run(cli));
}
