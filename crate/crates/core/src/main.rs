fn main() {
    std::process::exit(daylight_qkd::cli::run(std::env::args_os()));
}
