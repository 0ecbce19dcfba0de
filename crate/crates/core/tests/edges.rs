use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use spikelens::edges::{
    gaussian_blur, gaussian_kernel, hysteresis, nonmax_suppress, sobel_gradients, FloatImage,
    GradientField,
};
use spikelens::{canny, CannyParams, GrayImage};

/// Direct 5×5 convolution with replicated borders, no shared helpers.
fn brute_blur(img: &GrayImage) -> Vec<f64> {
    let sigma: f64 = 1.4;
    let mut k = [[0.0; 5]; 5];
    let mut total = 0.0;
    for (i, row) in k.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            let (dy, dx) = (i as f64 - 2.0, j as f64 - 2.0);
            *v = (-(dx * dx + dy * dy) / (2.0 * sigma * sigma)).exp();
            total += *v;
        }
    }
    let (w, h) = (img.width() as isize, img.height() as isize);
    let mut out = Vec::new();
    for r in 0..h {
        for c in 0..w {
            let mut acc = 0.0;
            for i in 0..5isize {
                for j in 0..5isize {
                    let rr = (r + i - 2).clamp(0, h - 1) as usize;
                    let cc = (c + j - 2).clamp(0, w - 1) as usize;
                    acc += k[i as usize][j as usize] / total * f64::from(img.get(rr, cc));
                }
            }
            out.push(acc);
        }
    }
    out
}

#[test]
fn kernel_matches_closed_form() {
    let k = gaussian_kernel();
    let sum: f64 = k.iter().flatten().sum();
    assert!((sum - 1.0).abs() < 1e-12);
    assert!((k[2][2] / k[2][3] - (1.0 / (2.0 * 1.4 * 1.4f64)).exp()).abs() < 1e-12);
}

#[test]
fn checkerboard_blur_matches_direct_convolution() {
    let img = GrayImage::from_fn(3, 3, |r, c| if (r + c) % 2 == 0 { 255 } else { 0 });
    let got = gaussian_blur(&img).unwrap();
    for (a, b) in got.data.iter().zip(brute_blur(&img)) {
        assert!((a - b).abs() < 1e-9, "{a} vs {b}");
    }
}

#[test]
fn random_blur_matches_direct_convolution() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let img = GrayImage::from_fn(11, 7, |_, _| rng.gen());
    let got = gaussian_blur(&img).unwrap();
    for (a, b) in got.data.iter().zip(brute_blur(&img)) {
        assert!((a - b).abs() < 1e-9);
    }
}

#[test]
fn ramp_gradient() {
    let img = FloatImage {
        width: 5,
        height: 5,
        data: (0..25).map(|i| 10.0 * (i % 5) as f64).collect(),
    };
    let g = sobel_gradients(&img).unwrap();
    for r in 1..4 {
        for c in 1..4 {
            assert_eq!(g.gx[r * 5 + c], 80.0);
            assert_eq!(g.gy[r * 5 + c], 0.0);
        }
    }
}

fn field(w: usize, h: usize, mag: Vec<f64>, dir: Vec<f64>) -> GradientField {
    GradientField {
        width: w,
        height: h,
        gx: vec![0.0; w * h],
        gy: vec![0.0; w * h],
        magnitude: mag,
        direction: dir,
    }
}

/// Keep a pixel iff it is interior and ≥ both neighbors along its direction
/// bin, enumerating the four bins explicitly.
fn nms_oracle(g: &GradientField) -> Vec<f64> {
    let (w, h) = (g.width, g.height);
    let mut out = vec![0.0; w * h];
    for r in 1..h.saturating_sub(1) {
        for c in 1..w.saturating_sub(1) {
            let i = r * w + c;
            let mut deg = g.direction[i].to_degrees();
            if deg < 0.0 {
                deg += 180.0;
            }
            let (a, b) = if !(22.5..157.5).contains(&deg) {
                (g.magnitude[i - 1], g.magnitude[i + 1])
            } else if deg < 67.5 {
                (g.magnitude[i - w - 1], g.magnitude[i + w + 1])
            } else if deg < 112.5 {
                (g.magnitude[i - w], g.magnitude[i + w])
            } else {
                (g.magnitude[i - w + 1], g.magnitude[i + w - 1])
            };
            let m = g.magnitude[i];
            if m >= a && m >= b {
                out[i] = m;
            }
        }
    }
    out
}

#[test]
fn nms_three_wide_band() {
    // vertical band of equal magnitude, gradient pointing across it
    let (w, h) = (9, 6);
    let mag = (0..w * h)
        .map(|i| if (3..6).contains(&(i % w)) { 50.0 } else { 0.0 })
        .collect();
    let g = field(w, h, mag, vec![0.0; w * h]);
    let got = nonmax_suppress(&g);
    assert_eq!(got.data, nms_oracle(&g));
    for r in 1..h - 1 {
        assert_eq!(got.get(r, 4), 50.0);
    }
}

#[test]
fn nms_random_fields_match_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..200 {
        let (w, h) = (rng.gen_range(1..12), rng.gen_range(1..12));
        let mag: Vec<f64> = (0..w * h)
            .map(|_| f64::from(rng.gen_range(0u8..6)) * 10.0)
            .collect();
        let dir = (0..w * h)
            .map(|_| rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI))
            .collect();
        let g = field(w, h, mag, dir);
        let got = nonmax_suppress(&g);
        assert_eq!(got.data, nms_oracle(&g));
        assert!(got.data.iter().zip(&g.magnitude).all(|(o, i)| o <= i));
    }
}

/// Breadth-first flood from strong pixels through ≥ low neighbors.
fn flood_oracle(img: &FloatImage, low: f64, high: f64) -> Vec<bool> {
    let (w, h) = (img.width, img.height);
    let mut mask = vec![false; w * h];
    let mut queue: std::collections::VecDeque<usize> =
        (0..w * h).filter(|&i| img.data[i] >= high).collect();
    for &i in &queue {
        mask[i] = true;
    }
    while let Some(p) = queue.pop_front() {
        let (r, c) = (p / w, p % w);
        let near: Vec<usize> = (0..w * h)
            .filter(|&q| (q / w).abs_diff(r) <= 1 && (q % w).abs_diff(c) <= 1)
            .collect();
        for q in near {
            if !mask[q] && img.data[q] >= low {
                mask[q] = true;
                queue.push_back(q);
            }
        }
    }
    mask
}

#[test]
fn hysteresis_matches_flood_fill() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..100 {
        let img = FloatImage {
            width: 8,
            height: 8,
            data: (0..64).map(|_| rng.gen_range(0.0..255.0)).collect(),
        };
        let got = hysteresis(&img, 100.0, 200.0).unwrap();
        assert_eq!(got.mask, flood_oracle(&img, 100.0, 200.0));
    }
}

#[test]
fn square_ring_hugs_boundary() {
    let img = GrayImage::from_fn(28, 28, |r, c| {
        if (8..20).contains(&r) && (8..20).contains(&c) {
            255
        } else {
            0
        }
    });
    let edges = canny(&img, CannyParams::default()).unwrap();
    assert!(edges.count() > 0);
    for r in 0..28 {
        for c in 0..28 {
            if edges.get(r, c) {
                // distance to the square's outline, in pixels
                let inside = (8..20).contains(&r) && (8..20).contains(&c);
                let d = if inside {
                    [r - 8, 19 - r, c - 8, 19 - c].into_iter().min().unwrap()
                } else {
                    let dr = if r < 8 { 8 - r } else { r.saturating_sub(19) };
                    let dc = if c < 8 { 8 - c } else { c.saturating_sub(19) };
                    dr.max(dc)
                };
                assert!(d <= 2, "edge pixel ({r},{c}) is {d} px from the boundary");
            }
        }
    }
    // every side of the square is represented
    assert!((8..20).any(|c| (6..11).any(|r| edges.get(r, c))));
    assert!((8..20).any(|c| (17..22).any(|r| edges.get(r, c))));
}

#[test]
fn raising_high_never_adds_edges() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let img = GrayImage::from_fn(28, 28, |_, _| if rng.gen_bool(0.3) { 255 } else { 0 });
    let mut prev = canny(
        &img,
        CannyParams {
            low: 50.0,
            high: 60.0,
        },
    )
    .unwrap();
    for high in [100.0, 150.0, 200.0, 255.0] {
        let next = canny(&img, CannyParams { low: 50.0, high }).unwrap();
        assert!(next.mask.iter().zip(&prev.mask).all(|(n, p)| !n || *p));
        prev = next;
    }
}

#[test]
fn constant_images_have_no_edges() {
    for v in [0u8, 1, 128, 255] {
        let img = GrayImage::from_fn(16, 12, |_, _| v);
        assert!(canny(&img, CannyParams::default()).unwrap().is_blank());
    }
}
