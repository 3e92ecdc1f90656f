use std::ffi::CStr;
use std::ptr;

use cocomp_ffi::*;

fn span(n: usize, cols: usize, re: &[f64]) -> *mut CocompSubspace {
    let mut out = ptr::null_mut();
    let status = unsafe { cocomp_subspace_span(n, cols, re.as_ptr(), ptr::null(), &mut out) };
    assert_eq!(status, CocompStatus::Ok);
    assert!(!out.is_null());
    out
}

fn last_error() -> String {
    let p = cocomp_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn orthogonal_lines_are_complementary() {
    let s = span(2, 1, &[1.0, 0.0]);
    let t = span(2, 1, &[0.0, 1.0]);
    let mut check = CocompCheck::default();
    assert_eq!(unsafe { cocomp_check(s, t, &mut check) }, CocompStatus::Ok);
    assert_eq!(
        (check.diff_invertible, check.norm_lt_one, check.direct_sum),
        (1, 1, 1)
    );
    assert!((check.margin - 1.0).abs() < 1e-12);
    assert_eq!(unsafe { cocomp_check(s, s, &mut check) }, CocompStatus::Ok);
    assert_eq!(check.direct_sum, 0);
    unsafe {
        cocomp_subspace_free(s);
        cocomp_subspace_free(t);
    }
}

#[test]
fn accessors_report_shape_and_basis() {
    let s = span(3, 2, &[2.0, 0.0, 0.0, 0.0, 0.0, 3.0]);
    unsafe {
        assert_eq!(cocomp_subspace_ambient_dim(s), 3);
        assert_eq!(cocomp_subspace_dim(s), 2);
        let (mut re, mut im) = (vec![0.0; 6], vec![0.0; 6]);
        assert_eq!(
            cocomp_subspace_basis(s, re.as_mut_ptr(), im.as_mut_ptr(), 6),
            CocompStatus::Ok
        );
        // Columns are unit vectors spanning e1, e3.
        for j in 0..2 {
            let norm: f64 = (0..3)
                .map(|i| re[i * 2 + j].powi(2) + im[i * 2 + j].powi(2))
                .sum();
            assert!((norm - 1.0).abs() < 1e-12);
            assert!(re[2 + j].abs() < 1e-12 && im[2 + j].abs() < 1e-12);
        }
        let status = cocomp_subspace_basis(s, re.as_mut_ptr(), im.as_mut_ptr(), 5);
        assert_eq!(status, CocompStatus::DimensionMismatch);
        assert!(last_error().contains("buffer"));
        cocomp_subspace_free(s);
    }
}

#[test]
fn common_complement_through_handles() {
    let s = span(2, 1, &[1.0, 0.0]);
    let mut cert = ptr::null_mut();
    unsafe {
        assert_eq!(
            cocomp_common_complement(s, s, 3, &mut cert),
            CocompStatus::Ok
        );
        let (mut ms, mut mt) = (0.0, 0.0);
        assert_eq!(
            cocomp_certificate_margins(cert, &mut ms, &mut mt),
            CocompStatus::Ok
        );
        assert!(ms > 0.0 && mt > 0.0);
        let mut z = ptr::null_mut();
        assert_eq!(
            cocomp_certificate_complement(cert, &mut z),
            CocompStatus::Ok
        );
        let mut check = CocompCheck::default();
        assert_eq!(cocomp_check(s, z, &mut check), CocompStatus::Ok);
        assert_eq!(check.direct_sum, 1);
        cocomp_subspace_free(z);
        cocomp_certificate_free(cert);
        cocomp_subspace_free(s);
    }
}

#[test]
fn errors_map_to_codes() {
    let plane = span(3, 2, &[1.0, 0.0, 0.0, 1.0, 0.0, 0.0]);
    let line = span(3, 1, &[0.0, 0.0, 1.0]);
    let other = span(2, 1, &[1.0, 1.0]);
    let mut cert = ptr::null_mut();
    let mut check = CocompCheck::default();
    let mut out = ptr::null_mut();
    unsafe {
        assert_eq!(
            cocomp_common_complement(plane, line, 0, &mut cert),
            CocompStatus::NotInDelta
        );
        assert!(cert.is_null());
        assert_eq!(
            cocomp_check(plane, other, &mut check),
            CocompStatus::DimensionMismatch
        );
        assert_eq!(
            cocomp_check(ptr::null(), line, &mut check),
            CocompStatus::NullPointer
        );
        let bad = [f64::NAN, 0.0];
        let status = cocomp_subspace_span(2, 1, bad.as_ptr(), ptr::null(), &mut out);
        assert_eq!(status, CocompStatus::InvalidInput);
        assert!(last_error().contains("finite"));
        let status = cocomp_subspace_span(2, 1, ptr::null(), ptr::null(), &mut out);
        assert_eq!(status, CocompStatus::NullPointer);
        cocomp_subspace_free(ptr::null_mut());
        cocomp_certificate_free(ptr::null_mut());
        cocomp_subspace_free(plane);
        cocomp_subspace_free(line);
        cocomp_subspace_free(other);
    }
}

#[test]
fn success_clears_the_last_error() {
    let mut out = ptr::null_mut();
    let status = unsafe { cocomp_subspace_span(1, 1, ptr::null(), ptr::null(), &mut out) };
    assert_eq!(status, CocompStatus::NullPointer);
    let s = span(1, 1, &[1.0]);
    assert!(cocomp_last_error().is_null());
    unsafe { cocomp_subspace_free(s) };
}

#[test]
fn generated_header_declares_the_api() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/cocomp.h"))
        .expect("build.rs writes the header");
    for symbol in [
        "cocomp_subspace_span",
        "cocomp_subspace_free",
        "cocomp_subspace_basis",
        "cocomp_check",
        "cocomp_common_complement",
        "cocomp_certificate_complement",
        "cocomp_certificate_margins",
        "cocomp_certificate_free",
        "cocomp_last_error",
        "COCOMP_STATUS_NOT_IN_DELTA",
        "typedef struct CocompSubspace CocompSubspace",
    ] {
        assert!(header.contains(symbol), "missing {symbol}");
    }
}

#[test]
fn header_compiles_as_c() {
    let header_dir = concat!(env!("CARGO_MANIFEST_DIR"), "/include");
    let dir = tempfile_dir();
    let src = dir.join("probe.c");
    std::fs::write(
        &src,
        "#include \"cocomp.h\"\nint probe(void) { CocompCheck c; return (int)sizeof c + COCOMP_STATUS_OK; }\n",
    )
    .unwrap();
    let Ok(out) = std::process::Command::new("cc")
        .args([
            "-std=c99",
            "-Wall",
            "-Werror",
            "-fsyntax-only",
            "-I",
            header_dir,
        ])
        .arg(&src)
        .output()
    else {
        eprintln!("no C compiler on PATH; skipping");
        return;
    };
    let _ = std::fs::remove_dir_all(&dir);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
}

fn tempfile_dir() -> std::path::PathBuf {
    let dir = std::env::temp_dir().join(format!("cocomp-ffi-probe-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}
