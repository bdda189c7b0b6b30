fn main() {
    std::process::exit(locstab::cli::run(std::env::args_os()));
}
