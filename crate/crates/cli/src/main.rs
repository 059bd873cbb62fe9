fn main() {
    eprintln!("semstyle: not yet wired up");
    std::process::exit(1);
}
