use clap::Parser;

fn main() -> std::process::ExitCode {
    kato_cli::main_with(kato_cli::Cli::parse())
}
