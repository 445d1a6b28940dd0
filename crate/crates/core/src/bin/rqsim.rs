use clap::Parser;

fn main() {
    env_logger::init();
    let code = rqsim::cli::execute(rqsim::cli::Cli::parse());
    std::process::exit(code);
}
