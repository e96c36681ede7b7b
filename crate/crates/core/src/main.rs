fn main() {
    std::process::exit(dictsense::cli::dispatch(std::env::args_os()));
}
