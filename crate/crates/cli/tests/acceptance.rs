use std::collections::BTreeMap;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::{Command, ExitCode};

use polyaug::bench::{self, BenchAssets, Preset};
use polyaug::{Datum, Envs, Kind};
use polyaug_audio::stft::{hpss_masks, Stft, HOP, HPSS_KERNEL, WINDOW};
use polyaug_audio::AudioBuffer;
use polyaug_core::{Pipeline, Rng, TransformSpec};
use polyaug_eval::{run_eval, Augmentation, Category, Item, Prediction, BASELINE, DEFAULT_SAMPLE_SIZE};
use polyaug_image::perspective::{corners, jitter, Homography};
use polyaug_image::{Channels, ImageEnv, Raster};
use polyaug_text::TextDoc;
use polyaug_video::{VideoClip, VideoEnv};
use serde_json::json;

type Check = std::result::Result<String, String>;

const REFERENCE_AUDIO: [&str; 20] = [
    "Harmonic", "Percussive", "PitchShift", "TimeStretch", "Reverb", "Tempo", "AddBackgroundNoise", "PeakingEqualizer",
    "InsertInBackground", "ChangeVolume", "HighPassFilter", "ToMono", "Normalize", "LowPassFilter", "Clicks", "Loop",
    "InvertChannels", "ApplyLambda", "Speed", "Clip",
];
const REFERENCE_IMAGE: [&str; 34] = [
    "ShufflePixels", "PerspectiveTransform", "Sharpen", "ApplyPILFilter", "ColorJitter", "Blur", "Saturation",
    "ChangeAspectRatio", "Skew", "OverlayStripes", "Pixelization", "Brightness", "OverlayOntoScreenshot", "Scale",
    "Resize", "OverlayOntoBackgroundImage", "EncodingQuality", "ConvertColor", "MaskedComposite", "Contrast", "Opacity",
    "OverlayText", "MemeFormat", "Rotate", "OverlayImage", "Pad", "ApplyLambda", "PadSquare", "OverlayEmoji",
    "Grayscale", "HFlip", "VFlip", "ClipImageSize", "Crop",
];
const REFERENCE_TEXT: [&str; 17] = [
    "SimulateTypos", "SwapGenderedWords", "ReplaceFunFonts", "ReplaceSimilarUnicodeChars", "ReplaceUpsideDown",
    "MergeWords", "ReplaceSimilarChars", "SplitWords", "ReplaceWords", "GetBaseline", "Contractions", "ChangeCase",
    "InsertPunctuationChars", "InsertWhitespaceChars", "ReplaceBidirectional", "InsertZeroWidthChars", "ApplyLambda",
];
const REFERENCE_VIDEO: [&str; 43] = [
    "ReplaceWithColorFrames", "Loop", "PerspectiveTransformAndShake", "BlendVideos", "ReplaceWithBackground",
    "OverlayText", "OverlayShapes", "TimeDecimate", "OverlayOntoScreenshot", "OverlayDots", "MemeFormat",
    "InsertInBackground", "OverlayOntoBackgroundVideo", "Shift", "Pixelization", "AugmentAudio", "OverlayEmoji",
    "Concat", "AudioSwap", "VStack", "Overlay", "HStack", "Pad", "TimeCrop", "Trim", "ChangeAspectRatio", "Crop",
    "Rotate", "Blur", "VFlip", "AddNoise", "Resize", "Scale", "FPS", "ChangeVideoSpeed", "HFlip", "Grayscale",
    "Contrast", "EncodingQuality", "ColorJitter", "Brightness", "RemoveAudio", "ApplyLambda",
];

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> std::result::Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn spec(name: &str, params: serde_json::Value) -> TransformSpec {
    TransformSpec { name: name.into(), params: serde_json::from_value(params).unwrap(), p: 1.0 }
}

fn apply(datum: &Datum, s: TransformSpec, seed: u64) -> Datum {
    datum.augment(&Pipeline::of([s]), &Envs::default(), &Rng::new(seed)).unwrap().0
}

fn audio_of(d: Datum) -> AudioBuffer {
    match d {
        Datum::Audio(a) => a,
        other => panic!("expected audio, got {:?}", other.kind()),
    }
}

// 1

fn determinism() -> Check {
    let envs = Envs::default();
    let assets = BenchAssets::create().unwrap();
    let single = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let mut checked = 0;
    for kind in Kind::ALL {
        let (datum, _) = bench::input(kind, Preset::Small);
        for op in kind.op_names() {
            let pipeline = Pipeline::of([bench::spec_for(kind, op, &datum, &assets)]);
            for seed in [0u64, 17] {
                let a = datum.augment(&pipeline, &envs, &Rng::new(seed)).map_err(|e| format!("{op}: {e}"))?;
                let b = single.install(|| datum.augment(&pipeline, &envs, &Rng::new(seed))).map_err(|e| format!("{op}: {e}"))?;
                ensure(a == b, || format!("{}/{op} differs between runs with seed {seed}", kind.name()))?;
                checked += 1;
            }
        }
    }
    let random_pipelines = [
        (Kind::Image, json!([{"op": "rotate", "params": {"degrees": {"uniform": [-30, 30]}}}, {"op": "random_noise", "p": 0.5}, {"op": "shuffle_pixels"}])),
        (Kind::Audio, json!([{"op": "pitch_shift", "params": {"n_semitones": {"uniform": [-3, 3]}}}, {"op": "add_background_noise"}])),
        (Kind::Text, json!([{"op": "simulate_typos"}, {"op": "insert_zero_width_chars", "p": 0.5}])),
        (Kind::Video, json!([{"op": "overlay_dots"}, {"op": "add_noise"}, {"op": "time_crop", "params": {"offset_factor": {"uniform": [0.0, 0.4]}}}])),
    ];
    for (kind, p) in random_pipelines {
        let pipeline = Pipeline::from_value(&p).unwrap();
        let (datum, _) = bench::input(kind, Preset::Small);
        for seed in 0..5 {
            let a = datum.augment(&pipeline, &envs, &Rng::new(seed)).unwrap();
            let b = single.install(|| datum.augment(&pipeline, &envs, &Rng::new(seed))).unwrap();
            ensure(a == b, || format!("{} random pipeline differs at seed {seed}", kind.name()))?;
            checked += 1;
        }
    }
    Ok(format!("{checked} seeded runs reproduced exactly, including on a 1-thread pool"))
}

// 2

fn identity_params(kind: Kind, op: &str) -> Option<polyaug_core::Params> {
    match kind {
        Kind::Audio => polyaug_audio::identity_params(op),
        Kind::Image => polyaug_image::identity_params(op),
        Kind::Text => polyaug_text::identity_params(op),
        Kind::Video => polyaug_video::identity_params(op),
    }
}

fn rms(a: &AudioBuffer, b: &AudioBuffer) -> f64 {
    let n = (a.len() * a.num_channels()) as f64;
    let s: f64 = a.channels().iter().flatten().zip(b.channels().iter().flatten()).map(|(x, y)| ((x - y) as f64).powi(2)).sum();
    (s / n).sqrt()
}

fn identities() -> Check {
    let assets = BenchAssets::create().unwrap();
    let mut exact = Vec::new();
    for kind in Kind::ALL {
        let (datum, _) = bench::input(kind, Preset::Small);
        for op in kind.op_names() {
            let off = bench::spec_for(kind, op, &datum, &assets).with_p(0.0);
            ensure(apply(&datum, off, 3) == datum, || format!("{}/{op} changed the input at p=0", kind.name()))?;
            if let Some(params) = identity_params(kind, op) {
                let s = TransformSpec { name: op.into(), params, p: 1.0 };
                ensure(apply(&datum, s, 3) == datum, || format!("{}/{op} identity params are not bit exact", kind.name()))?;
                exact.push(format!("{}/{op}", kind.name()));
            }
        }
    }

    let (img, _) = bench::input(Kind::Image, Preset::Small);
    let wide = Datum::Image(Raster::from_fn(7, 4, Channels::Rgba, |x, y| [x as u8 * 30, y as u8 * 50, 9, 200]));
    for d in [&img, &wide] {
        for op in ["hflip", "vflip"] {
            let twice = apply(&apply(d, spec(op, json!({})), 0), spec(op, json!({})), 0);
            ensure(twice == *d, || format!("{op} twice is not the identity"))?;
        }
        let mut r = d.clone();
        for _ in 0..4 {
            r = apply(&r, spec("rotate", json!({"degrees": 90.0})), 0);
        }
        ensure(r == *d, || "four quarter turns are not the identity".into())?;
    }
    let (clip, _) = bench::input(Kind::Video, Preset::Small);
    let twice = apply(&apply(&clip, spec("hflip", json!({})), 0), spec("hflip", json!({})), 0);
    ensure(twice == clip, || "video hflip twice is not the identity".into())?;

    let (audio, _) = bench::input(Kind::Audio, Preset::Small);
    let a = match &audio {
        Datum::Audio(a) => a.clone(),
        _ => unreachable!(),
    };
    let mut worst = 0.0f64;
    for (op, params) in [
        ("pitch_shift", json!({"n_semitones": 0.0})),
        ("time_stretch", json!({"rate": 1.0})),
        ("tempo", json!({"factor": 1.0})),
    ] {
        let out = audio_of(apply(&audio, spec(op, params), 0));
        ensure(out.len() == a.len(), || format!("{op} changed the length"))?;
        let e = rms(&out, &a);
        ensure(e < 1e-3, || format!("{op} neutral RMS error {e:.2e}"))?;
        worst = worst.max(e);
    }
    ensure(exact.len() >= 25, || format!("only {} bit-exact identities", exact.len()))?;
    Ok(format!("{} ops bit-exact, p=0 exact for all, involutions hold, STFT neutral RMS <= {worst:.1e}", exact.len()))
}

// 3

/// Frequency in `lo..hi` (1 Hz steps) with the largest Hann-windowed DFT
/// magnitude over the middle quarter second of channel 0.
fn dominant_hz(a: &AudioBuffer, lo: f64, hi: f64) -> f64 {
    let sr = a.sample_rate() as f64;
    let x = a.channel(0);
    let n = (sr / 4.0) as usize;
    let start = (x.len() - n) / 2;
    let w: Vec<f64> = (0..n)
        .map(|i| x[start + i] as f64 * (0.5 - 0.5 * (std::f64::consts::TAU * i as f64 / n as f64).cos()))
        .collect();
    let mag = |f: f64| {
        let (mut re, mut im) = (0.0, 0.0);
        for (i, v) in w.iter().enumerate() {
            let ph = std::f64::consts::TAU * f * i as f64 / sr;
            re += v * ph.cos();
            im -= v * ph.sin();
        }
        re * re + im * im
    };
    let mut best = (lo, 0.0);
    let mut f = lo;
    while f <= hi {
        let m = mag(f);
        if m > best.1 {
            best = (f, m);
        }
        f += 1.0;
    }
    best.0
}

fn power(x: &[f32]) -> f64 {
    x.iter().map(|&s| (s as f64).powi(2)).sum::<f64>() / x.len() as f64
}

fn dsp_oracles() -> Check {
    const SR: u32 = 44_100;
    let tone = |f: f64, secs: f64| Datum::Audio(AudioBuffer::sine(f, 0.5, secs, 1, SR).unwrap());

    let up = audio_of(apply(&tone(440.0, 1.0), spec("pitch_shift", json!({"n_semitones": 12.0})), 0));
    let f_up = dominant_hz(&up, 300.0, 1500.0);
    ensure((f_up / 880.0 - 1.0).abs() <= 0.03, || format!("pitch +12: peak at {f_up} Hz"))?;

    let stretched = audio_of(apply(&tone(440.0, 4.0), spec("time_stretch", json!({"rate": 2.0})), 0));
    let dlen = (stretched.len() as i64 - 2 * SR as i64).unsigned_abs() as usize;
    ensure(dlen <= HOP, || format!("time_stretch 2.0: length off by {dlen} samples"))?;
    let f_ts = dominant_hz(&stretched, 300.0, 1500.0);
    ensure((f_ts / 440.0 - 1.0).abs() <= 0.02, || format!("time_stretch 2.0: peak at {f_ts} Hz"))?;

    let ten = Datum::Audio(AudioBuffer::sine(330.0, 0.4, 10.0, 2, SR).unwrap());
    let fast = audio_of(apply(&ten, spec("tempo", json!({"factor": 2.0})), 0));
    let dt = (fast.duration() - 5.0).abs();
    ensure(dt <= HOP as f64 / SR as f64, || format!("tempo 2.0: duration {}", fast.duration()))?;

    let hi = match tone(5000.0, 1.0) {
        Datum::Audio(a) => a,
        _ => unreachable!(),
    };
    let lp = audio_of(apply(&Datum::Audio(hi.clone()), spec("low_pass_filter", json!({"cutoff_hz": 500.0})), 0));
    let skip = SR as usize / 20;
    let atten = 10.0 * (power(&lp.channel(0)[skip..]) / power(&hi.channel(0)[skip..])).log10();
    ensure(atten <= -30.0, || format!("low-pass at 10x cutoff: {atten:.1} dB"))?;

    let mut rng = Rng::new(8);
    let noisy: Vec<f64> = (0..SR as usize).map(|i| 0.3 * (i as f64 * 0.05).sin() + rng.gaussian(0.0, 0.05)).collect();
    let stft = Stft::forward(&noisy, WINDOW, HOP).unwrap();
    let (h, p) = hpss_masks(&stft, HPSS_KERNEL);
    let mask_err = h.iter().flatten().zip(p.iter().flatten()).map(|(a, b)| (a + b - 1.0).abs()).fold(0.0, f64::max);
    ensure(mask_err <= 1e-12, || format!("HPSS masks deviate from 1 by {mask_err:e}"))?;

    let clean = AudioBuffer::sine(440.0, 0.2, 1.0, 1, SR).unwrap();
    let mixed = audio_of(apply(&Datum::Audio(clean.clone()), spec("add_background_noise", json!({"snr_level_db": 0.0})), 4));
    let residual: Vec<f32> = mixed.channel(0).iter().zip(clean.channel(0)).map(|(m, c)| m - c).collect();
    let snr = 10.0 * (power(clean.channel(0)) / power(&residual)).log10();
    ensure(snr.abs() <= 0.1, || format!("0 dB SNR mix measured {snr:.3} dB"))?;

    Ok(format!(
        "pitch {f_up} Hz, stretch len off {dlen} peak {f_ts} Hz, tempo {:.4} s, low-pass {atten:.1} dB, masks {mask_err:.0e}, snr {snr:.3} dB",
        fast.duration()
    ))
}

// 4

fn geometry() -> Check {
    let img = Datum::Image(Raster::filled(120, 90, Channels::Rgb, [10, 200, 30, 255]));
    let meme = apply(&img, spec("meme_format", json!({"caption_height": 75, "text": "LOL"})), 0);
    let Datum::Image(m) = meme else { unreachable!() };
    ensure(m.dims() == (120, 165), || format!("meme_format gave {:?}", m.dims()))?;

    let frames = (0..100).map(|i| Raster::filled(8, 8, Channels::Rgb, [i as u8, 0, 0, 255])).collect();
    let audio = AudioBuffer::sine(220.0, 0.3, 10.0, 1, 8000).unwrap();
    let clip = VideoClip::from_rasters(frames, 10.0, Some(audio.clone())).unwrap();
    let out = polyaug_video::augmenter(&VideoEnv::default())
        .apply_with_probability(&spec("time_crop", json!({"offset_factor": 0.2, "duration_factor": 0.4})), &clip, &mut Rng::new(0))
        .unwrap()
        .0;
    ensure(out.duration() == 4.0, || format!("time_crop duration {}", out.duration()))?;
    ensure(out.frame(0).pixel(0, 0)[0] == 20, || "time_crop does not start at 2 s".into())?;
    ensure(out.audio().unwrap().channel(0) == &audio.channel(0)[16_000..48_000], || "time_crop audio window".into())?;

    let px = [[0u8, 10, 20], [30, 40, 50], [60, 70, 80], [90, 100, 111]];
    let tiny = Datum::Image(Raster::new(2, 2, Channels::Rgb, px.concat()).unwrap());
    let Datum::Image(pix) = apply(&tiny, spec("pixelization", json!({"ratio": 0.5})), 0) else { unreachable!() };
    let avg: Vec<u8> = (0..3).map(|c| (px.iter().map(|p| p[c] as f64).sum::<f64>() / 4.0).round() as u8).collect();
    ensure(pix.dims() == (2, 2) && pix.data().chunks(3).all(|p| p == avg.as_slice()), || format!("pixelization gave {:?}", pix.data()))?;

    let mut rng = Rng::new(21);
    let mut worst = 0.0f64;
    let mut solved = 0;
    for _ in 0..500 {
        let from = jitter(&corners(640, 480), 40.0, &mut rng);
        let to = jitter(&corners(640, 480), 60.0, &mut rng);
        let Ok(h) = Homography::from_points(&from, &to) else { continue };
        solved += 1;
        for (f, t) in from.iter().zip(&to) {
            let (x, y) = h.apply(*f).ok_or("point at infinity")?;
            worst = worst.max((x - t.0).hypot(y - t.1));
        }
    }
    ensure(solved >= 400 && worst < 1e-6, || format!("homography residual {worst:e} over {solved} quads"))?;
    Ok(format!("meme 90->165, time_crop 4 s from frame 20, pixelization {avg:?}, homography residual {worst:.1e}"))
}

// 5

fn random_corpus(n: usize, seed: u64) -> Vec<String> {
    let pools: [&[char]; 5] = [
        &['a', 'b', 'c', 'x', 'y', 'z', 'A', 'Q', 'Z', '0', '7'],
        &[' ', ' ', ',', '.', '!', '?', '\'', '-'],
        &['é', 'ß', 'ø', 'Ω', 'ж', 'ق'],
        &['中', '文', 'ひ', '한'],
        &['😀', '🚀', '👍'],
    ];
    let mut rng = Rng::new(seed);
    (0..n)
        .map(|_| {
            let len = rng.below(60) as usize;
            (0..len)
                .map(|_| {
                    let pool = pools[[0, 0, 0, 1, 1, 2, 3, 4][rng.index(8)]];
                    pool[rng.index(pool.len())]
                })
                .collect()
        })
        .collect()
}

fn text_round_trips() -> Check {
    const ZW: [char; 4] = ['\u{200B}', '\u{200C}', '\u{200D}', '\u{2060}'];
    let env = polyaug_text::TextEnv::default();
    let aug = polyaug_text::augmenter(&env);
    let run = |name: &str, params: serde_json::Value, s: &str, seed: u64| -> String {
        aug.apply_with_probability(&spec(name, params), &TextDoc::new(s), &mut Rng::new(seed)).unwrap().0.into_string()
    };
    let corpus = random_corpus(1000, 5);
    let mut inserted = 0usize;
    for (i, s) in corpus.iter().enumerate() {
        let g = if i % 2 == 0 { "all" } else { "word" };
        let zw = run("insert_zero_width_chars", json!({"aug_p": 0.5, "granularity": g}), s, i as u64);
        inserted += zw.chars().filter(|c| ZW.contains(c)).count();
        let stripped: String = zw.chars().filter(|c| !ZW.contains(c)).collect();
        ensure(stripped == *s, || format!("zero-width strip failed for {s:?}"))?;

        let bidi: Vec<char> = run("replace_bidirectional", json!({}), s, 0).chars().collect();
        ensure(bidi.len() >= 2 && bidi[0] == '\u{202E}' && bidi[bidi.len() - 1] == '\u{202C}', || format!("bidi markers missing for {s:?}"))?;
        let unwrapped: String = bidi[1..bidi.len() - 1].iter().rev().collect();
        ensure(unwrapped == *s, || format!("bidi unwrap failed for {s:?}"))?;

        let words = s.split_whitespace().count();
        for (op, params) in [
            ("simulate_typos", json!({"aug_word_p": 1.0})),
            ("replace_similar_unicode_chars", json!({"aug_char_p": 1.0})),
            ("replace_similar_chars", json!({"aug_char_p": 1.0})),
        ] {
            let out = run(op, params, s, i as u64);
            ensure(out.split_whitespace().count() == words, || format!("{op} changed the word count of {s:?}: {out:?}"))?;
        }

        let once = run("replace_upside_down", json!({}), s, 0);
        ensure(run("replace_upside_down", json!({}), &once, 0) == *s, || format!("upside-down twice changed {s:?}"))?;
    }
    ensure(inserted > 0, || "no zero-width characters were inserted".into())?;
    Ok(format!("1000 strings; {inserted} zero-width chars stripped; bidi and upside-down round trips exact; typo/homoglyph word counts kept"))
}

// 6

const LABELS: usize = 7;

fn eval_dataset(dir: &Path, n: usize) -> Vec<Item> {
    (0..n)
        .map(|i| {
            let k = i % LABELS;
            let img = Raster::from_fn(24, 24, Channels::Rgb, |x, y| {
                if x == 0 {
                    [255, 255, 255, 255]
                } else if (8..16).contains(&x) && (8..16).contains(&y) {
                    [(k * 30) as u8, 0, 0, 255]
                } else {
                    [40, 90, (i * 7) as u8, 255]
                }
            });
            let path = dir.join(format!("{i}.png"));
            img.save(&path).unwrap();
            Item { id: path.display().to_string(), path, label: format!("L{k}") }
        })
        .collect()
}

/// Decodes the label from the central block when the white column is on the
/// left and the label is even; otherwise answers with labels never used.
fn flip_sensitive(files: &[PathBuf]) -> polyaug_eval::Result<Vec<Prediction>> {
    files
        .iter()
        .map(|f| {
            let img = Raster::load(f)?;
            let (w, h) = img.dims();
            let k = (img.pixel(w / 2, h / 2)[0] as usize + 15) / 30;
            let left = img.pixel(0, h / 2) == [255, 255, 255, 255];
            let first = if left && k.is_multiple_of(2) { k } else { 100 };
            Prediction::new(f.display().to_string(), (0..5).map(|j| format!("L{}", first + j * 20)).collect())
        })
        .collect()
}

fn eval_harness() -> Check {
    let data = tempfile::tempdir().unwrap();
    let items = eval_dataset(data.path(), 21);
    let augs = vec![
        Augmentation::new("hflip", Category::Spatial, TransformSpec::new("hflip")),
        Augmentation::new("grayscale", Category::Color, TransformSpec::new("grayscale")),
        Augmentation::new("noise", Category::PixelLevel, TransformSpec::new("random_noise")),
    ];
    let run = || {
        let work = tempfile::tempdir().unwrap();
        let mut mock = flip_sensitive;
        run_eval(&items, &augs, &mut mock, 9, &ImageEnv::default(), work.path()).unwrap()
    };
    let (a, b) = (run(), run());
    // even labels 0, 2, 4, 6 of 0..7, three times
    ensure(a.baseline_acc == 12.0 / 21.0, || format!("baseline accuracy {}", a.baseline_acc))?;
    ensure(a.row(BASELINE).and_then(|r| r.delta) == Some(0.0), || "baseline delta is not 0".into())?;
    let flip = a.row("hflip").and_then(|r| r.delta);
    ensure(flip == Some(-a.baseline_acc), || format!("hflip delta {flip:?}"))?;
    ensure(a == b, || "reports differ between identical runs".into())?;
    ensure(DEFAULT_SAMPLE_SIZE == 250, || "library default sample size".into())?;
    let help = Command::new(env!("CARGO_BIN_EXE_polyaug")).args(["eval", "--help"]).output().unwrap();
    let help = String::from_utf8_lossy(&help.stdout);
    let n_line = help.lines().find(|l| l.trim_start().starts_with("-n")).unwrap_or("");
    ensure(n_line.contains("[default: 250]"), || format!("-n help line: {n_line:?}"))?;
    Ok(format!("baseline {:.4}, hflip delta {:.4}, -n default 250, reproducible", a.baseline_acc, flip.unwrap()))
}

// 7

fn bench_rows() -> Check {
    let envs = Envs::default();
    let mut counts = BTreeMap::new();
    let mut all = Vec::new();
    for kind in Kind::ALL {
        let rows = bench::run(kind, bench::MIN_ITERATIONS, Preset::Small, &envs).map_err(|e| e.to_string())?;
        if let Some(r) = rows.iter().find(|r| r.skipped.is_some() || !(r.mean_s > 0.0)) {
            return Err(format!("{}/{}: mean {} skipped {:?}", kind.name(), r.op, r.mean_s, r.skipped));
        }
        counts.insert(kind.name(), rows.len());
        all.extend(rows);
    }
    let expected = BTreeMap::from([("audio", 20), ("image", 35), ("text", 17), ("video", 43)]);
    ensure(counts == expected, || format!("row counts {counts:?}"))?;
    let mut buf = Vec::new();
    bench::write_csv(&all, &mut buf).map_err(|e| e.to_string())?;
    let mut reader = csv::Reader::from_reader(buf.as_slice());
    let headers = reader.headers().map_err(|e| e.to_string())?.clone();
    let mean_col = headers.iter().position(|h| h == "mean_s").ok_or("no mean_s column")?;
    let mut parsed = 0;
    for rec in reader.records() {
        let rec = rec.map_err(|e| e.to_string())?;
        let m: f64 = rec[mean_col].parse().map_err(|e| format!("mean {:?}: {e}", &rec[mean_col]))?;
        ensure(m > 0.0, || format!("csv mean {m}"))?;
        parsed += 1;
    }
    ensure(parsed == all.len(), || format!("csv has {parsed} rows, expected {}", all.len()))?;
    Ok(format!("{counts:?}, {parsed} CSV rows parsed, all means > 0"))
}

// 8

fn catalog_name(class: &str) -> String {
    match class {
        "HFlip" => "hflip".into(),
        "VFlip" => "vflip".into(),
        "HStack" => "hstack".into(),
        "VStack" => "vstack".into(),
        "FPS" => "fps".into(),
        "ApplyPILFilter" => "apply_filter_kernel".into(),
        _ => {
            let mut out = String::new();
            for (i, c) in class.chars().enumerate() {
                if c.is_ascii_uppercase() && i > 0 {
                    out.push('_');
                }
                out.push(c.to_ascii_lowercase());
            }
            out
        }
    }
}

fn coverage() -> Check {
    let doc_path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../docs/coverage.md");
    let doc = std::fs::read_to_string(&doc_path).map_err(|e| format!("{}: {e}", doc_path.display()))?;
    let documented: Vec<Vec<String>> = doc
        .lines()
        .filter(|l| l.starts_with('|'))
        .map(|l| l.split('|').map(|c| c.trim().trim_matches('`').to_string()).filter(|c| !c.is_empty()).collect())
        .collect();
    let mut registered = 0;
    let mut out_of_scope = Vec::new();
    let mut missing = Vec::new();
    for (kind, refs) in [
        (Kind::Audio, &REFERENCE_AUDIO[..]),
        (Kind::Image, &REFERENCE_IMAGE[..]),
        (Kind::Text, &REFERENCE_TEXT[..]),
        (Kind::Video, &REFERENCE_VIDEO[..]),
    ] {
        let names = kind.op_names();
        for class in refs {
            let row = documented.iter().find(|r| r.len() >= 3 && r[0] == kind.name() && r[1] == *class);
            let want = catalog_name(class);
            match row {
                Some(r) if r[2] == want && names.contains(&want.as_str()) => registered += 1,
                Some(r) if r.iter().any(|c| c.starts_with("out of scope")) => out_of_scope.push(format!("{}/{class}", kind.name())),
                _ => missing.push(format!("{}/{class}", kind.name())),
            }
        }
    }
    ensure(missing.is_empty(), || format!("neither registered nor documented: {missing:?}"))?;
    Ok(format!("{registered} registered and documented, {} out of scope {out_of_scope:?}", out_of_scope.len()))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Check); 8] = [
        ("determinism", determinism),
        ("identities and involutions", identities),
        ("dsp oracles", dsp_oracles),
        ("geometry", geometry),
        ("text round trips", text_round_trips),
        ("eval harness", eval_harness),
        ("bench rows", bench_rows),
        ("coverage", coverage),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let result = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
            let msg = e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panicked: {}", msg.unwrap_or_default()))
        });
        match result {
            Ok(detail) => println!("PASS {} {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {} {name}: {why}", i + 1);
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
