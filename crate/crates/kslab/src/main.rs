fn main() {
    std::process::exit(kslab::cli::dispatch(std::env::args_os()));
}
