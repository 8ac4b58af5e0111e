//! When does assembling the operator pay off? The model on synthetic
//! inputs, then measured on a real subdomain.

use dualop::assembler::{amortization_point, AmortizationInputs};
use dualop::bench::{format_amortization, parse_variant_pair, run_amortization, AmortizeSpec};
use dualop::error::Result;

fn main() -> Result<()> {
    println!("the model: smallest k with extra + k * explicit < k * implicit\n");
    for (extra, im, ex) in [
        (10.0, 2.0, 1.0),
        (0.0, 2.0, 1.0),
        (10.0, 3.0, 1.0),
        (5.0, 1.0, 1.0),
    ] {
        let point = amortization_point(&AmortizationInputs {
            t_assembly_extra: extra,
            t_apply_implicit: im,
            t_apply_explicit: ex,
        })?;
        println!(
            "  extra {extra:>4}, implicit {im}, explicit {ex}  ->  {}",
            format_amortization(point)
        );
    }

    println!("\nmeasured on a 3D subdomain (median timings):\n");
    let spec = AmortizeSpec {
        dims: vec![3],
        subdomain_sizes: vec![343],
        variants: vec![
            parse_variant_pair("baseline_dense+baseline")?,
            parse_variant_pair("baseline_sparse+baseline")?,
            parse_variant_pair("factor_split+input_split")?,
        ],
        apply_repetitions: 200,
        assembly_repetitions: 3,
    };
    let mut csv = Vec::new();
    for r in run_amortization(&spec, &mut csv)? {
        println!(
            "  {:<26} assembly {:>8.3} ms, apply {:>7.3} -> {:>6.3} us, amortizes at {}",
            r.variant,
            r.t_assembly_ms,
            r.t_apply_impl_us,
            r.t_apply_expl_us,
            format_amortization(r.amortization_iters)
        );
    }
    println!("\ncheaper assembly moves the break-even point earlier at identical apply cost.");
    Ok(())
}
