//! Hyperbox construction around an optimization end point.
//!
//! The box axes are the eigenvectors of JᵀJ and the per-direction extents
//! come from the coarse-to-fine line search that stops once the distance
//! crosses ε. Isotropic objectives give near-cubes; anisotropic ones give
//! boxes matching the level-set ellipse.
//!
//! Run with: `cargo run --release --example hyperbox_geometry`

use omc::linalg::Mat;
use omc::regions::{box_density, build_hyperbox, sample_box, LineSearchParams};
use omc::streams::{substream, StreamKind};

fn main() {
    let params = LineSearchParams::default();
    let eps = 0.04;

    // isotropic quadratic: true boundary at sqrt(eps) = 0.2 in every direction
    let d_iso = |x: &[f64]| x.iter().map(|v| v * v).sum::<f64>();
    let iso = build_hyperbox(&d_iso, &[0.0, 0.0], &Mat::identity(2), &params, eps).unwrap();
    let b = &iso.hyperbox;
    println!(
        "isotropic: extents -[{:.3}, {:.3}] +[{:.3}, {:.3}] volume {:.4}",
        b.neg_extents()[0],
        b.neg_extents()[1],
        b.pos_extents()[0],
        b.pos_extents()[1],
        b.volume()
    );

    // anisotropic 4x^2 + y^2: semi-axes 0.1 and 0.2
    let d_aniso = |x: &[f64]| 4.0 * x[0] * x[0] + x[1] * x[1];
    let j = Mat::from_rows(&[vec![2.0, 0.0], vec![0.0, 1.0]]);
    let aniso = build_hyperbox(&d_aniso, &[0.0, 0.0], &j, &params, eps).unwrap();
    let b = &aniso.hyperbox;
    println!(
        "anisotropic: extents +[{:.3}, {:.3}], ratio {:.2} (ellipse ratio 2.0)",
        b.pos_extents()[0],
        b.pos_extents()[1],
        b.pos_extents()[1] / b.pos_extents()[0]
    );

    // a rotated frame: the line search follows the eigenvectors of JᵀJ
    let c = (std::f64::consts::FRAC_PI_4).cos();
    let d_rot = |x: &[f64]| {
        let u = c * (x[0] + x[1]);
        let v = c * (-x[0] + x[1]);
        4.0 * u * u + v * v
    };
    let j_rot = Mat::from_rows(&[vec![2.0 * c, 2.0 * c], vec![-c, c]]);
    let rot = build_hyperbox(&d_rot, &[0.0, 0.0], &j_rot, &params, eps).unwrap();
    let b = &rot.hyperbox;
    println!(
        "rotated: first axis [{:+.3}, {:+.3}], extents +[{:.3}, {:.3}]",
        b.axes().get(0, 0),
        b.axes().get(1, 0),
        b.pos_extents()[0],
        b.pos_extents()[1]
    );

    // the box carries a uniform distribution: density 1/volume on support
    let mut rng = substream(1, StreamKind::Proposal, 0, 0);
    let draws: Vec<_> = (0..5).map(|_| sample_box(&aniso.hyperbox, &mut rng)).collect();
    for s in &draws {
        println!(
            "  draw [{:+.3}, {:+.3}] density {:.3}",
            s[0],
            s[1],
            box_density(&aniso.hyperbox, s.values())
        );
    }
}
