use std::io::Write;

fn main() {
    let dir = lefkit::fixture_dir();
    let result = lefkit::run(std::env::args_os(), Some(&dir));
    let mut out = std::io::stdout().lock();
    // A closed pipe is not worth a panic.
    let _ = out.write_all(result.render().as_bytes());
    let _ = out.flush();
    std::process::exit(result.exit_code());
}
