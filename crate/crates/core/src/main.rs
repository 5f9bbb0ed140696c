use clap::Parser;

fn main() {
    let cli = spinflow::cli::Cli::parse();
    std::process::exit(spinflow::cli::run(cli));
}
