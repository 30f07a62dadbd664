fn main() {
    std::process::exit(walshperm_cli::run(std::env::args_os()));
}
