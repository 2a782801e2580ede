//! Dense complex eigendecomposition and linear solves on top of the system
//! LAPACK (zgeev, zgesv). Matrices here are small (tens of rows), so the
//! marshalling cost of converting between ndarray's row-major layout and
//! LAPACK's column-major buffers is irrelevant.

use ndarray::Array2;
use num_complex::Complex64;
use std::os::raw::c_char;

use crate::error::{Error, Result};

extern "C" {
    fn zgeev_(
        jobvl: *const c_char,
        jobvr: *const c_char,
        n: *const i32,
        a: *mut Complex64,
        lda: *const i32,
        w: *mut Complex64,
        vl: *mut Complex64,
        ldvl: *const i32,
        vr: *mut Complex64,
        ldvr: *const i32,
        work: *mut Complex64,
        lwork: *const i32,
        rwork: *mut f64,
        info: *mut i32,
    );

    fn zgesv_(
        n: *const i32,
        nrhs: *const i32,
        a: *mut Complex64,
        lda: *const i32,
        ipiv: *mut i32,
        b: *mut Complex64,
        ldb: *const i32,
        info: *mut i32,
    );
}

fn to_col_major(a: &Array2<Complex64>) -> Vec<Complex64> {
    let (rows, cols) = a.dim();
    let mut buf = Vec::with_capacity(rows * cols);
    for c in 0..cols {
        for r in 0..rows {
            buf.push(a[[r, c]]);
        }
    }
    buf
}

fn from_col_major(buf: &[Complex64], rows: usize, cols: usize) -> Array2<Complex64> {
    Array2::from_shape_fn((rows, cols), |(r, c)| buf[c * rows + r])
}

fn require_square(a: &Array2<Complex64>, routine: &'static str) -> Result<usize> {
    let (rows, cols) = a.dim();
    if rows != cols || rows == 0 {
        return Err(Error::Numerical(format!(
            "{routine}: need a nonempty square matrix, got {rows}x{cols}"
        )));
    }
    if rows > i32::MAX as usize {
        return Err(Error::Numerical(format!("{routine}: matrix too large ({rows})")));
    }
    Ok(rows)
}

/// Eigenvalues and right eigenvectors of a general complex matrix.
/// Eigenvector j is the j-th column of the returned matrix.
pub fn eig(a: &Array2<Complex64>) -> Result<(Vec<Complex64>, Array2<Complex64>)> {
    let n = require_square(a, "zgeev")?;
    let ni = n as i32;
    let mut buf = to_col_major(a);
    let mut w = vec![Complex64::new(0.0, 0.0); n];
    let mut vr = vec![Complex64::new(0.0, 0.0); n * n];
    let mut rwork = vec![0.0f64; 2 * n];
    let mut info = 0i32;
    let jobvl = b'N' as c_char;
    let jobvr = b'V' as c_char;
    let one = 1i32;

    // Workspace query, then the real call.
    let mut probe = [Complex64::new(0.0, 0.0)];
    let query = -1i32;
    unsafe {
        zgeev_(
            &jobvl,
            &jobvr,
            &ni,
            buf.as_mut_ptr(),
            &ni,
            w.as_mut_ptr(),
            std::ptr::null_mut(),
            &one,
            vr.as_mut_ptr(),
            &ni,
            probe.as_mut_ptr(),
            &query,
            rwork.as_mut_ptr(),
            &mut info,
        );
    }
    if info != 0 {
        return Err(Error::Lapack { routine: "zgeev", info });
    }
    let lwork = probe[0].re.max(1.0) as i32;
    let mut work = vec![Complex64::new(0.0, 0.0); lwork as usize];
    unsafe {
        zgeev_(
            &jobvl,
            &jobvr,
            &ni,
            buf.as_mut_ptr(),
            &ni,
            w.as_mut_ptr(),
            std::ptr::null_mut(),
            &one,
            vr.as_mut_ptr(),
            &ni,
            work.as_mut_ptr(),
            &lwork,
            rwork.as_mut_ptr(),
            &mut info,
        );
    }
    if info != 0 {
        return Err(Error::Lapack { routine: "zgeev", info });
    }
    Ok((w, from_col_major(&vr, n, n)))
}

/// Solve A X = B for X with partial-pivot LU.
pub fn solve(a: &Array2<Complex64>, b: &Array2<Complex64>) -> Result<Array2<Complex64>> {
    let n = require_square(a, "zgesv")?;
    let (brows, bcols) = b.dim();
    if brows != n || bcols == 0 {
        return Err(Error::Numerical(format!(
            "zgesv: rhs shape {brows}x{bcols} does not match system size {n}"
        )));
    }
    let ni = n as i32;
    let nrhs = bcols as i32;
    let mut abuf = to_col_major(a);
    let mut bbuf = to_col_major(b);
    let mut ipiv = vec![0i32; n];
    let mut info = 0i32;
    unsafe {
        zgesv_(
            &ni,
            &nrhs,
            abuf.as_mut_ptr(),
            &ni,
            ipiv.as_mut_ptr(),
            bbuf.as_mut_ptr(),
            &ni,
            &mut info,
        );
    }
    if info != 0 {
        return Err(Error::Lapack { routine: "zgesv", info });
    }
    Ok(from_col_major(&bbuf, n, bcols))
}

/// Matrix inverse via LU solve against the identity.
pub fn inv(a: &Array2<Complex64>) -> Result<Array2<Complex64>> {
    let n = require_square(a, "zgesv")?;
    let eye = Array2::from_shape_fn((n, n), |(r, c)| {
        if r == c {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    solve(a, &eye)
}

pub fn identity(n: usize) -> Array2<Complex64> {
    Array2::from_shape_fn((n, n), |(r, c)| {
        if r == c {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    })
}
