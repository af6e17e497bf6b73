fn main() {
    let (text, code) = semilocal_poisson::cli::run(std::env::args_os());
    if code == 2 && !text.starts_with('{') {
        eprint!("{text}");
    } else {
        print!("{text}");
    }
    std::process::exit(code);
}
