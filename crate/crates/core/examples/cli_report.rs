//! Drives the command-line front end in-process and captures its JSON report.

fn main() {
    let args = ["relhist", "probs", "--scenario", "hardy", "--family", "unitary-output", "--event", "e,ebar", "--format", "json"];
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = relhist::cli::run(args, &mut out, &mut err);
    println!("exit code {code}");
    print!("{}", String::from_utf8_lossy(&out));
    eprint!("{}", String::from_utf8_lossy(&err));
}
