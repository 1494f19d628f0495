//! Golden-file cases: `NAME.cmd` holds the arguments one per line, `NAME.out`
//! the expected standard output and `NAME.exit` the expected exit code.
//! `$DATA` in an argument expands to the `data` directory next to the cases.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use crate::run_cli;

#[derive(Debug, Clone)]
pub struct Case {
    pub name: String,
    pub args: Vec<String>,
    dir: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub stdout: String,
    pub code: i32,
}

pub fn load(dir: &Path) -> io::Result<Vec<Case>> {
    let data = dir.join("data");
    let mut cases = Vec::new();
    for entry in fs::read_dir(dir)? {
        let path = entry?.path();
        if path.extension().is_some_and(|e| e == "cmd") {
            let name = path
                .file_stem()
                .expect("cmd file has a stem")
                .to_string_lossy()
                .into_owned();
            let args = fs::read_to_string(&path)?
                .lines()
                .map(|l| l.replace("$DATA", &data.to_string_lossy()))
                .collect();
            cases.push(Case {
                name,
                args,
                dir: dir.to_path_buf(),
            });
        }
    }
    cases.sort_by(|a, b| a.name.cmp(&b.name));
    Ok(cases)
}

impl Case {
    /// Run with `--seed 0` appended.
    pub fn run(&self) -> Outcome {
        let mut argv = vec!["krealize".to_string()];
        argv.extend(self.args.iter().cloned());
        argv.extend(["--seed".to_string(), "0".to_string()]);
        let (mut out, mut err) = (Vec::new(), Vec::new());
        let code = run_cli(argv, &mut out, &mut err);
        Outcome {
            stdout: String::from_utf8(out).expect("utf-8 output"),
            code,
        }
    }

    pub fn expected(&self) -> io::Result<Outcome> {
        let stdout = fs::read_to_string(self.dir.join(format!("{}.out", self.name)))?;
        let code = fs::read_to_string(self.dir.join(format!("{}.exit", self.name)))?;
        let code = code
            .trim()
            .parse()
            .map_err(|_| io::Error::new(io::ErrorKind::InvalidData, "bad exit file"))?;
        Ok(Outcome { stdout, code })
    }

    /// Write the current outcome as the expected one.
    pub fn bless(&self) -> io::Result<()> {
        let got = self.run();
        fs::write(self.dir.join(format!("{}.out", self.name)), &got.stdout)?;
        fs::write(
            self.dir.join(format!("{}.exit", self.name)),
            format!("{}\n", got.code),
        )
    }

    /// `None` when the outcome matches byte for byte, a description otherwise.
    pub fn check(&self) -> Option<String> {
        let want = match self.expected() {
            Ok(w) => w,
            Err(e) => return Some(format!("{}: {e}", self.name)),
        };
        let got = self.run();
        if got == want {
            None
        } else {
            Some(format!(
                "{}: expected exit {} and\n{}got exit {} and\n{}",
                self.name, want.code, want.stdout, got.code, got.stdout
            ))
        }
    }
}
