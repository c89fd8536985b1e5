use reilly_lab::geometry::{build_corpus_immersion, induced_metric, Shape};
use reilly_lab::conformal::{balance, BalanceOpts};

fn main() {
    let shape = Shape::Ellipsoid { a: 1.3, b: 1.0, c: 0.8, shift: [0.5, 0.0, 0.0] };
    let imm = build_corpus_immersion(&shape, 2).unwrap();
    let md = induced_metric(&imm).unwrap();
    for fd in [1e-7, 1e-8, 1e-9, 1e-10] {
        let opts = BalanceOpts { fd_step: fd, max_newton: 300, ..Default::default() };
        match balance(&imm, &md, 1.5, &opts) {
            Ok(bm) => println!("fd={fd:.0e}: conv={} iters={} residual={:.3e} (target {:.3e})",
                bm.converged, bm.iterations, bm.residual_norm(), 1e-8*md.total_volume()),
            Err(e) => println!("fd={fd:.0e}: error {e}"),
        }
    }
}
