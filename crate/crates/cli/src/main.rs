fn main() {
    // Panics are reported by `execute` as internal errors.
    std::panic::set_hook(Box::new(|_| {}));
    let code = celebprof::execute(std::env::args_os(), &mut std::io::stdout(), &mut std::io::stderr());
    std::process::exit(code);
}
