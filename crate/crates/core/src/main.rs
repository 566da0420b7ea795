fn main() {
    std::process::exit(varseq::cli::run(std::env::args_os()));
}
