// probe: sensitivity of log_upsilon to quadrature knobs
fn main() {
    let ev = liouville::upsilon::UpsilonEvaluator::new(1.5).unwrap();
    let v = ev.log_upsilon(num_complex::Complex64::new(1.0, 0.0)).unwrap();
    println!("logU(1.0) = {:.16e}  want ln(0.99738397407825514102) = {:.16e}", v.re, 0.99738397407825514102_f64.ln());
    println!("diff = {:.3e}", v.re - 0.99738397407825514102_f64.ln());
}
