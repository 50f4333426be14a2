//! Analytic gradients of every layer type against central differences over
//! many random instances. Inputs are treated as parameters so input
//! gradients are checked alongside weights.

use gestarlite_core::nn::gradcheck::gradient_check;
use gestarlite_core::nn::lstm::LstmParams;
use gestarlite_core::nn::{mse_loss, Conv2d, Dense, LayerSpec, Network, Parameterized, RecurrentClassifier, Tensor};
use gestarlite_core::rng::seeded;
use rand::Rng;

const TOL: f64 = 1e-4;
const SEEDS: u64 = 100;

/// A layer plus its input and a regression target, all perturbable.
struct Probe<L> {
    layer: L,
    input: Tensor,
    target: Vec<f64>,
}

impl Parameterized for Probe<Dense> {
    fn param_names(&self) -> Vec<String> {
        ["weight", "bias", "input"].map(String::from).to_vec()
    }
    fn params(&self) -> Vec<&Tensor> {
        vec![&self.layer.weight, &self.layer.bias, &self.input]
    }
    fn params_mut(&mut self) -> Vec<&mut Tensor> {
        vec![&mut self.layer.weight, &mut self.layer.bias, &mut self.input]
    }
}

impl Parameterized for Probe<Conv2d> {
    fn param_names(&self) -> Vec<String> {
        ["kernel", "bias", "input"].map(String::from).to_vec()
    }
    fn params(&self) -> Vec<&Tensor> {
        vec![&self.layer.weight, &self.layer.bias, &self.input]
    }
    fn params_mut(&mut self) -> Vec<&mut Tensor> {
        vec![&mut self.layer.weight, &mut self.layer.bias, &mut self.input]
    }
}

/// Parameter-free single-layer network; only the input is perturbed.
impl Parameterized for Probe<Network> {
    fn param_names(&self) -> Vec<String> {
        vec!["input".into()]
    }
    fn params(&self) -> Vec<&Tensor> {
        vec![&self.input]
    }
    fn params_mut(&mut self) -> Vec<&mut Tensor> {
        vec![&mut self.input]
    }
}

struct LstmProbe {
    cell: LstmParams,
    xs: Vec<Vec<f64>>,
    reverse: bool,
    target: Vec<f64>,
}

impl Parameterized for LstmProbe {
    fn param_names(&self) -> Vec<String> {
        ["w_input", "w_hidden", "bias"].map(String::from).to_vec()
    }
    fn params(&self) -> Vec<&Tensor> {
        vec![&self.cell.w_input, &self.cell.w_hidden, &self.cell.bias]
    }
    fn params_mut(&mut self) -> Vec<&mut Tensor> {
        vec![&mut self.cell.w_input, &mut self.cell.w_hidden, &mut self.cell.bias]
    }
}

fn random_vec(n: usize, rng: &mut impl Rng) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()
}

#[test]
fn dense_gradients() {
    let mut worst: f64 = 0.0;
    for seed in 0..SEEDS {
        let mut rng = seeded(seed);
        let mut probe = Probe {
            layer: Dense::init(4, 3, &mut rng),
            input: Tensor::vector(random_vec(4, &mut rng)),
            target: random_vec(3, &mut rng),
        };
        let y = probe.layer.forward(probe.input.data()).unwrap();
        let (_, gy) = mse_loss(&y, &probe.target).unwrap();
        let mut grads = vec![Tensor::zeros(&[3, 4]), Tensor::zeros(&[3])];
        let (gw, gb) = grads.split_at_mut(1);
        let gx = probe.layer.backward(probe.input.data(), &gy, &mut gw[0], &mut gb[0]).unwrap();
        grads.push(Tensor::vector(gx));
        let report = gradient_check(&mut probe, &grads, |p| {
            Ok(mse_loss(&p.layer.forward(p.input.data())?, &p.target)?.0)
        })
        .unwrap();
        worst = worst.max(report.max_rel_error);
    }
    assert!(worst <= TOL, "dense worst relative error {worst:e}");
}

#[test]
fn conv_gradients() {
    let mut worst: f64 = 0.0;
    for seed in 0..SEEDS {
        let mut rng = seeded(1000 + seed);
        let (stride, padding) = [(1, 0), (1, 1), (2, 0)][seed as usize % 3];
        let layer = Conv2d::init(3, 2, 3, stride, padding, &mut rng);
        let input = Tensor::uniform(&[3, 5, 5], 1.0, &mut rng);
        let out_len: usize = layer.output_shape(input.shape()).unwrap().iter().product();
        let mut probe = Probe {
            layer,
            input,
            target: random_vec(out_len, &mut rng),
        };
        let (y, cache) = probe.layer.forward_cached(&probe.input).unwrap();
        let (_, gy) = mse_loss(y.data(), &probe.target).unwrap();
        let gy = Tensor::new(y.shape().to_vec(), gy).unwrap();
        let mut gw = Tensor::zeros(probe.layer.weight.shape());
        let mut gb = Tensor::zeros(&[2]);
        let gx = probe.layer.backward(&cache, &gy, &mut gw, &mut gb, true).unwrap().unwrap();
        let report = gradient_check(&mut probe, &[gw, gb, gx], |p| {
            Ok(mse_loss(p.layer.forward(&p.input)?.data(), &p.target)?.0)
        })
        .unwrap();
        worst = worst.max(report.max_rel_error);
    }
    assert!(worst <= TOL, "conv worst relative error {worst:e}");
}

fn single_layer_probe(spec: LayerSpec, input: Tensor, rng: &mut impl Rng) -> Probe<Network> {
    let net = Network::from_spec(input.shape(), &[spec], 0).unwrap();
    let out_len: usize = net.output_shape().iter().product();
    Probe {
        layer: net,
        input,
        target: random_vec(out_len, rng),
    }
}

fn check_network_probe(probe: &mut Probe<Network>) -> f64 {
    let (y, trace) = probe.layer.forward_train(&probe.input).unwrap();
    let (_, gy) = mse_loss(y.data(), &probe.target).unwrap();
    let gy = Tensor::new(y.shape().to_vec(), gy).unwrap();
    let gx = probe.layer.backward(trace, &gy, &mut []).unwrap();
    gradient_check(probe, &[gx], |p| {
        Ok(mse_loss(p.layer.forward(&p.input)?.data(), &p.target)?.0)
    })
    .unwrap()
    .max_rel_error
}

#[test]
fn maxpool_gradients() {
    let mut worst: f64 = 0.0;
    for seed in 0..SEEDS {
        let mut rng = seeded(2000 + seed);
        // Distinct values spaced well beyond the finite-difference step so no
        // perturbation changes a window's argmax.
        let mut values: Vec<f64> = (0..36).map(|i| i as f64 * 0.05).collect();
        for i in (1..values.len()).rev() {
            values.swap(i, rng.random_range(0..=i));
        }
        let input = Tensor::new(vec![1, 6, 6], values).unwrap();
        let mut probe = single_layer_probe(LayerSpec::Maxpool2d { window: 2, stride: 2 }, input, &mut rng);
        worst = worst.max(check_network_probe(&mut probe));
    }
    assert!(worst <= TOL, "maxpool worst relative error {worst:e}");
}

#[test]
fn relu_gradients() {
    let mut worst: f64 = 0.0;
    for seed in 0..SEEDS {
        let mut rng = seeded(3000 + seed);
        // Keep inputs away from the kink at zero.
        let data: Vec<f64> = (0..12)
            .map(|_| {
                let m: f64 = rng.random_range(0.01..1.0);
                if rng.random_bool(0.5) { m } else { -m }
            })
            .collect();
        let mut probe = single_layer_probe(LayerSpec::Relu, Tensor::vector(data), &mut rng);
        worst = worst.max(check_network_probe(&mut probe));
    }
    assert!(worst <= TOL, "relu worst relative error {worst:e}");
}

#[test]
fn lstm_cell_gradients_both_directions() {
    let mut worst: f64 = 0.0;
    for seed in 0..SEEDS {
        let mut rng = seeded(4000 + seed);
        let mut probe = LstmProbe {
            cell: LstmParams::init(2, 4, &mut rng),
            xs: (0..6).map(|_| random_vec(2, &mut rng)).collect(),
            reverse: seed % 2 == 1,
            target: random_vec(4, &mut rng),
        };
        let (h, caches) = probe.cell.run(&probe.xs, probe.reverse).unwrap();
        let (_, gh) = mse_loss(&h, &probe.target).unwrap();
        let mut grads = vec![
            Tensor::zeros(probe.cell.w_input.shape()),
            Tensor::zeros(probe.cell.w_hidden.shape()),
            Tensor::zeros(probe.cell.bias.shape()),
        ];
        probe.cell.backward(&caches, &gh, &mut grads).unwrap();
        let report = gradient_check(&mut probe, &grads, |p| {
            Ok(mse_loss(&p.cell.final_hidden(&p.xs, p.reverse)?, &p.target)?.0)
        })
        .unwrap();
        worst = worst.max(report.max_rel_error);
    }
    assert!(worst <= TOL, "lstm worst relative error {worst:e}");
}

#[test]
fn small_cnn_end_to_end_gradients() {
    let specs = [
        LayerSpec::Conv2d { in_channels: 2, out_channels: 3, kernel: 3, stride: 1, padding: 0 },
        LayerSpec::Relu,
        LayerSpec::Conv2d { in_channels: 3, out_channels: 3, kernel: 3, stride: 1, padding: 1 },
        LayerSpec::Relu,
        LayerSpec::Maxpool2d { window: 2, stride: 2 },
        LayerSpec::Dense { inputs: 3 * 3 * 3, units: 5 },
        LayerSpec::Relu,
        LayerSpec::Dense { inputs: 5, units: 2 },
    ];
    for seed in 0..10 {
        let mut rng = seeded(5000 + seed);
        let mut net = Network::from_spec(&[2, 8, 8], &specs, seed).unwrap();
        let x = Tensor::uniform(&[2, 8, 8], 1.0, &mut rng);
        let target = random_vec(2, &mut rng);
        let (y, trace) = net.forward_train(&x).unwrap();
        let (_, gy) = mse_loss(y.data(), &target).unwrap();
        let mut grads = net.zero_grads();
        net.backward(trace, &Tensor::vector(gy), &mut grads).unwrap();
        let report = gradient_check(&mut net, &grads, |n| Ok(mse_loss(n.forward(&x)?.data(), &target)?.0)).unwrap();
        assert!(report.passes(TOL), "seed {seed}: {report:?}");
    }
}

#[test]
fn lstm_classifier_gradients() {
    for seed in 0..20 {
        let mut rng = seeded(6000 + seed);
        let mut model = RecurrentClassifier::lstm(2, 5, 4, seed);
        let xs: Vec<Vec<f64>> = (0..5).map(|_| random_vec(2, &mut rng)).collect();
        let target = rng.random_range(0..4);
        let mut grads = model.zero_grads();
        model.accumulate_gradients(&xs, target, &mut grads).unwrap();
        let report = gradient_check(&mut model, &grads, |m| m.loss(&xs, target)).unwrap();
        assert!(report.passes(TOL), "seed {seed}: {report:?}");
    }
}

#[test]
fn bilstm_classifier_gradients() {
    let mut worst: f64 = 0.0;
    for seed in 0..5 {
        let mut rng = seeded(7000 + seed);
        let mut model = RecurrentClassifier::bilstm(2, 30, 10, seed);
        assert_eq!(model.num_params(), 8230);
        let xs: Vec<Vec<f64>> = (0..5).map(|_| vec![rng.random_range(0.0..1.0), rng.random_range(0.0..1.0)]).collect();
        let target = rng.random_range(0..10);
        let mut grads = model.zero_grads();
        model.accumulate_gradients(&xs, target, &mut grads).unwrap();
        let report = gradient_check(&mut model, &grads, |m| m.loss(&xs, target)).unwrap();
        assert_eq!(report.checked, 8230);
        worst = worst.max(report.max_rel_error);
    }
    assert!(worst <= TOL, "bilstm worst relative error {worst:e}");
}
