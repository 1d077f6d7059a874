fn main() { std::process::exit(purcellkit::cli::run(std::env::args().skip(1).collect())); }
