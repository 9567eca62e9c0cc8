use std::fmt::Write as _;
use std::path::PathBuf;

fn code_point(field: &str) -> char {
    let hex = field
        .strip_prefix("U+")
        .unwrap_or_else(|| panic!("bad code point {field:?}"));
    let value = u32::from_str_radix(hex, 16).expect("hex code point");
    char::from_u32(value).expect("valid scalar value")
}

fn main() {
    let src = "data/folding.tsv";
    println!("cargo:rerun-if-changed={src}");
    let table = std::fs::read_to_string(src).expect("folding table");

    let mut version = None;
    let mut letters = String::new();
    let mut digits = String::new();
    for line in table.lines() {
        let line = line.trim_end();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        match fields.as_slice() {
            ["version", v] => version = Some(v.parse::<u32>().expect("numeric version")),
            [kind, from, to, rule] => {
                let arm = format!(
                    "        {:?} => Some(({:?}, {:?})),\n",
                    code_point(from),
                    code_point(to),
                    rule
                );
                match *kind {
                    "letter" => letters.push_str(&arm),
                    "digit" => digits.push_str(&arm),
                    other => panic!("unknown folding kind {other:?}"),
                }
            }
            _ => panic!("malformed folding line {line:?}"),
        }
    }

    let mut out = String::new();
    writeln!(out, "/// Version of the bundled folding table.").unwrap();
    writeln!(
        out,
        "pub const FOLDING_TABLE_VERSION: u32 = {};",
        version.expect("folding table version line")
    )
    .unwrap();
    writeln!(
        out,
        "pub(crate) fn fold_letter(c: char) -> Option<(char, &'static str)> {{\n    match c {{\n{letters}        _ => None,\n    }}\n}}"
    )
    .unwrap();
    writeln!(
        out,
        "pub(crate) fn fold_digit(c: char) -> Option<(char, &'static str)> {{\n    match c {{\n{digits}        _ => None,\n    }}\n}}"
    )
    .unwrap();

    let dest = PathBuf::from(std::env::var("OUT_DIR").unwrap()).join("folding.rs");
    std::fs::write(dest, out).unwrap();
}
