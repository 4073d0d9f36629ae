use std::env;
use std::path::PathBuf;

fn main() {
    let crate_dir = PathBuf::from(env::var("CARGO_MANIFEST_DIR").unwrap());
    let header = crate_dir.join("include").join("wnev.h");
    let mut config = cbindgen::Config::default();
    config.language = cbindgen::Language::C;
    config.header = Some("/* C interface to the Wilson-Nevanlinna library. */".into());
    config.include_guard = Some("WNEV_H".into());
    config.cpp_compat = true;
    config.documentation = true;
    match cbindgen::Builder::new()
        .with_crate(&crate_dir)
        .with_config(config)
        .generate()
    {
        Ok(bindings) => {
            bindings.write_to_file(header);
        }
        Err(e) => println!("cargo:warning=cbindgen failed: {e}"),
    }
    println!("cargo:rerun-if-changed=src/lib.rs");
}
