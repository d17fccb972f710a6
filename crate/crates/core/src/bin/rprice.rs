fn main() {
    std::process::exit(reasonable_price::cli::main_with_args(std::env::args_os()));
}
