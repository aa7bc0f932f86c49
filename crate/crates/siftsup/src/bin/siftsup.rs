fn main() {
    // Placeholder while the CLI module lands.
    eprintln!("siftsup: not yet wired");
    std::process::exit(2);
}
