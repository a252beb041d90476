use clap::Parser;

fn main() {
    let args = singuline::cli::Args::parse();
    std::process::exit(singuline::cli::main_with_args(&args));
}
