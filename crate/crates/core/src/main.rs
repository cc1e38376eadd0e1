fn main() {
    std::process::exit(ud_reorder::cli::run(std::env::args_os()));
}
