//! Bounding the clearing price through the shape of the utilities: check a
//! parameter box, map the price over two parameters, and find the worst case.

use eqkit::{
    certify_worst_case_price, contour_sweep, fixtures, is_admissible, quadratic_price, ContourSpec,
    QuadraticProfile, ShapingBounds,
};

fn main() -> eqkit::Result<()> {
    let bounds: ShapingBounds = serde_json::from_str(fixtures::EXAMPLE3_BOUNDS)?;
    let report = is_admissible(&bounds);
    println!("admissible: {} (slacks {:?})", report.admissible, report.slacks);

    let profile = QuadraticProfile::new(vec![44.0, 46.0, 48.0], vec![4.0, 5.0, 6.0]);
    let price = quadratic_price(&profile, bounds.capacity)?;
    println!("price for k = {:?}, b = {:?}: {:.4}", profile.k, profile.b, price.price);

    let spec: ContourSpec = serde_json::from_str(fixtures::EXAMPLE3_B_CONTOUR)?;
    let grid = contour_sweep(&spec)?;
    let (peak, b1, b2) = grid.max();
    println!("highest price on the b1/b2 grid: {peak:.4} at b1 = {b1}, b2 = {b2}");
    print!("{}", grid.to_csv());

    let cert = certify_worst_case_price(&bounds, 10_000, 0)?;
    println!(
        "worst case over the box: {} with k = {:?}, b = {:?} (cap {}, certified {})",
        cert.worst_price, cert.witness.k, cert.witness.b, bounds.lambda_dagger, cert.certified
    );
    Ok(())
}
