//! Error-probability bounds at n = 10^4 and mean SNR 3 as the rate approaches
//! capacity.

use uep::bounds::{capacity, err_exp, err_nor};

fn main() {
    let (n, snr) = (1e4, 3.0);
    let c = capacity(snr);
    println!("capacity {c:.4} bits/use");
    println!("{:>5} {:>12} {:>12}", "R/C", "exponent", "normal");
    for f in [0.5, 0.8, 0.9, 0.95, 0.98, 1.0, 1.02] {
        let r = f * c;
        println!(
            "{f:>5.2} {:>12.4e} {:>12.4e}",
            err_exp(n, r, snr),
            err_nor(n, r, snr)
        );
    }
}
