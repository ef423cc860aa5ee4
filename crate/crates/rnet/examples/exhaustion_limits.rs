//! Free and wired truncations of an infinite network, and how a limit
//! over the exhaustion is traced and certified.

use rnet::exhaust::{boundary_of, truncate, Flavor, LimitTracker};
use rnet::models::{build_model, ModelSpec};
use rnet::resist::reduce_two_terminal;
use rnet::{Network, Vertex};

fn main() {
    // Integers with conductance 2^|n| on the edge toward n: transient,
    // two graph ends.
    let net: Network = build_model(&ModelSpec::GeoInt { c: 2.0 }).unwrap();

    // The free truncation keeps the ball as an induced subnetwork. The
    // wired one adds a single vertex for everything outside and reroutes
    // every severed edge into it.
    for flavor in [Flavor::Free, Flavor::Wired] {
        let t = truncate(&net, 3, flavor).unwrap();
        let bd = boundary_of(&t);
        println!(
            "{flavor:?} truncation at k=3: {} vertices, boundary {:?}, infinity present: {}",
            t.network().vertices().unwrap().len(),
            bd.boundary.iter().map(|v| v.to_string()).collect::<Vec<_>>(),
            t.has_infinity(),
        );
        if flavor == Flavor::Wired {
            // Conductance into infinity is the sum of severed edges.
            let c = t.network().edge(&Vertex::Int(3), &Vertex::Infinity).unwrap();
            println!("  c(3, infinity) = {:?} (severed edge 3-4 has 2^4 = 16)", c);
        }
    }

    // A limit is a trace of per-level values; certification needs three
    // consecutive deltas under the tolerance. Here: the escape resistance
    // R^W_k(0, infinity), reduced out of each wired truncation.
    let mut tracker = LimitTracker::new(1e-3);
    println!("\nR^W_k(0, infinity) trace:");
    for k in 1..=12u32 {
        let t = truncate(&net, k, Flavor::Wired).unwrap();
        let red = reduce_two_terminal(t.network(), &Vertex::Int(0), &Vertex::Infinity).unwrap();
        tracker.push(k, red.resistance);
    }
    let r = tracker.into_report();
    for lv in &r.trace {
        match lv.delta {
            Some(d) => println!("  k={:2}  {:.10}  delta {:.3e}", lv.level, lv.value, d),
            None => println!("  k={:2}  {:.10}", lv.level, lv.value),
        }
    }
    println!(
        "value = {:.10}, converged = {} (exact limit is 1/2; each level adds 2^-(k+2))",
        r.value, r.converged
    );
}
