fn main() {
    // Dense complex eigenproblems and linear solves go through the system
    // LAPACK (zgeev/zgesv). Netlib reference LAPACK is enough: the matrices
    // are small (truncation order ~41 => 83x83).
    println!("cargo:rustc-link-lib=dylib=lapack");
}
