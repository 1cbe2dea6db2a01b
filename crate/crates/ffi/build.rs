use std::path::PathBuf;

fn main() {
    let crate_dir = PathBuf::from(std::env::var("CARGO_MANIFEST_DIR").unwrap());
    let header = crate_dir.join("include").join("blochmap.h");
    println!("cargo:rerun-if-changed=src/lib.rs");
    println!("cargo:rerun-if-changed=cbindgen.toml");
    match cbindgen::generate(&crate_dir) {
        Ok(bindings) => {
            bindings.write_to_file(header);
        }
        // keep a stale header usable when cbindgen itself chokes (e.g. while
        // the source is mid-edit under an IDE build)
        Err(e) => println!("cargo:warning=cbindgen failed: {e}"),
    }
}
