fn main() {
    std::process::exit(nbmf::cli::run(std::env::args_os()));
}
