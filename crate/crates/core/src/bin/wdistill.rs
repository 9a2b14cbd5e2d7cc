fn main() {
    std::process::exit(wdistill::cli::run(std::env::args_os()));
}
