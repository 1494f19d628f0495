fn main() {
    let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden");
    for c in krealize_cli::golden::load(&dir).unwrap() {
        c.bless().unwrap();
    }
}
