fn main() {
    std::process::exit(qperc_cli::run(std::env::args_os()));
}
