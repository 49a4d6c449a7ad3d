fn main() {
    std::process::exit(fiberops::cli::run());
}
