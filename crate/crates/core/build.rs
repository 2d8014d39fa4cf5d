fn main() {
    // LAPACK backend: the system OpenBLAS bundles BLAS, CBLAS and LAPACK
    // symbols, so we link it directly instead of going through a *-src crate.
    println!("cargo:rustc-link-lib=dylib=openblas");
}
