//! Reading a problem document and running commands on it.

use semilocal_poisson::cli::run;
use semilocal_poisson::{jacobiator, parse_structure, Overrides};

const DOCUMENT: &str = r#"
n = 2
order = 4
grid = 64

[brackets."theta,x1"]
"x1" = [2.0, 0.0, 1.0]

[brackets]
"theta,x2" = "sqrt(2)*(2 + sin(theta))*x2"
"x1,x2" = "0"
"#;

fn main() {
    let problem = parse_structure(DOCUMENT, &Overrides::default()).unwrap();
    println!("parsed n = {}, Jacobiator {:.2e}", problem.structure.nvars(), jacobiator(&problem.structure).norm);

    let dir = std::env::temp_dir().join("semilocal-poisson-example");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("problem.toml");
    std::fs::write(&path, DOCUMENT).unwrap();
    let path = path.to_str().unwrap();

    for cmd in ["invariants", "foliation"] {
        let (report, code) = run(["semilocal-poisson", cmd, path]);
        println!("$ semilocal-poisson {cmd} problem.toml   (exit {code})\n{report}");
    }
}
