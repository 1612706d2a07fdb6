fn main() {
    use kpp_core::kernels::KernelSpec;
    let l = KernelSpec::Laplace { mu: 3.0, dim: 1 };
    for lam in [2.5, 2.76, 2.8, 2.9, 2.99] {
        let r = l.mgf_directional_quadrature(&[1.0], lam);
        println!("lambda {lam}: {r:?}  closed: {:?}", l.mgf_directional(&[1.0], lam));
    }
}
