use quartic_cert::cert::Method;
use quartic_cert::certify::{certify, CertifyOptions, MethodChoice};
use quartic_cert::poly::parse_poly;
use quartic_cert::verify::verify_certificate;

const CHOI_LAM: &str = "x0^4 + x1^2*x2^2 + x2^2*x3^2 + x3^2*x1^2 - 4*x0*x1*x2*x3";

fn run(text: &str, method: MethodChoice) -> quartic_cert::cert::Certificate {
    let f = parse_poly(text).unwrap();
    let opts = CertifyOptions { method, ..Default::default() };
    let t = std::time::Instant::now();
    let cert = certify(&f, &opts).unwrap_or_else(|e| panic!("{text} via {method:?}: {e}"));
    eprintln!("{text} {method:?}: {:?} residual {:.2e} N={} in {:?}", cert.method, cert.residual, cert.num_squares(), t.elapsed());
    let report = verify_certificate(&f, &cert, 1e-6);
    assert!(report.passed, "{}", report.summary());
    cert
}

#[test]
fn choi_lam_structured() {
    let cert = run(CHOI_LAM, MethodChoice::Structured);
    assert_eq!(cert.method, Method::Structured);
    assert!(cert.num_squares() <= 27);
}

#[test]
fn choi_lam_direct() {
    let cert = run(CHOI_LAM, MethodChoice::Direct);
    assert_eq!(cert.method, Method::Direct);
}

#[test]
fn choi_lam_auto_is_not_fast_path() {
    let cert = run(CHOI_LAM, MethodChoice::Auto);
    assert_ne!(cert.method, Method::SosFastPath);
}

#[test]
fn fourth_powers_take_fast_path() {
    let cert = run("x0^4 + x1^4 + x2^4 + x3^4", MethodChoice::Auto);
    assert_eq!(cert.method, Method::SosFastPath);
}

#[test]
fn sphere_square_structured_positive_case() {
    let cert = run("(x0^2 + x1^2 + x2^2 + x3^2)^2", MethodChoice::Structured);
    assert_eq!(cert.method, Method::Structured);
    assert!(cert.transform.scale > 0.0);
}
