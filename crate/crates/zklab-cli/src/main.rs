fn main() {
    std::process::exit(zklab_cli::run(std::env::args_os()));
}
