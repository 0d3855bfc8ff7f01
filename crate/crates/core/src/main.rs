fn main() {
    std::process::exit(bernstein_convex::cli::run(std::env::args_os()));
}
