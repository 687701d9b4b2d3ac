//! The audio transform catalog.

use std::path::Path;
use std::sync::{Arc, OnceLock};

use polyaug_core::intensity::{fraction, log2_factor, saturating};
use polyaug_core::{lambda, Augmenter, Catalog, Error, Lambdas, Modality, OpDef, ParamDecl, Params, Result, Shape};
use serde_json::{json, Value};

use crate::buffer::AudioBuffer;
use crate::dsp::Biquad;
use crate::ops;
use crate::stft::{Component, HPSS_KERNEL};

pub struct AudioModality;

#[derive(Clone, Default)]
pub struct AudioEnv {
    pub lambdas: Arc<Lambdas<AudioBuffer>>,
}

impl AudioEnv {
    pub fn with_lambdas(lambdas: Lambdas<AudioBuffer>) -> Self {
        Self { lambdas: Arc::new(lambdas) }
    }
}

impl Modality for AudioModality {
    type Datum = AudioBuffer;
    type Env = AudioEnv;
    const NAME: &'static str = "audio";

    fn shape(a: &AudioBuffer) -> Shape {
        Shape::Audio { samples: a.len(), channels: a.num_channels(), sample_rate: a.sample_rate() }
    }
}

pub type AudioOp = OpDef<AudioModality>;

pub fn catalog() -> &'static Catalog<AudioModality> {
    static CATALOG: OnceLock<Catalog<AudioModality>> = OnceLock::new();
    CATALOG.get_or_init(|| Catalog::new(ops()))
}

pub fn augmenter(env: &AudioEnv) -> Augmenter<'_, AudioModality> {
    Augmenter::new(catalog(), env)
}

fn nyquist(op: &str, shape: Option<&Shape>) -> Result<f64> {
    match shape {
        Some(Shape::Audio { sample_rate, .. }) => Ok(*sample_rate as f64 / 2.0),
        _ => Err(Error::Intensity { op: op.into(), reason: "needs the sample rate".into() }),
    }
}

fn multichannel(shape: Option<&Shape>) -> f64 {
    match shape {
        Some(Shape::Audio { channels: 1, .. }) => 0.0,
        _ => 100.0,
    }
}

fn background(p: &Params) -> Result<Option<AudioBuffer>> {
    p.opt_str("background_audio")?.map(|path| AudioBuffer::load(Path::new(path))).transpose()
}

fn odd_kernel(p: &Params) -> Result<()> {
    if p.i64("kernel_size")? % 2 == 1 {
        Ok(())
    } else {
        Err(Error::invalid("hpss", "`kernel_size` must be odd"))
    }
}

fn ops() -> Vec<AudioOp> {
    vec![
        AudioOp::new("add_background_noise", |a, p, ctx| {
            let noise = match background(p)? {
                Some(b) => b,
                None => ops::white_noise(a.num_channels(), a.len(), 1.0, a.sample_rate(), &ctx.rng)?,
            };
            ops::add_background_noise(a, &noise, p.f64("snr_level_db")?)
        })
        .param(ParamDecl::text("background_audio", "").optional())
        .param(ParamDecl::float("snr_level_db", -40.0, 120.0, 10.0))
        .intensity(|p, _, _| Ok(fraction((60.0 - p.f64("snr_level_db")?) / 80.0))),
        AudioOp::new("apply_lambda", |a, p, ctx| ctx.env.lambdas.call(a, p, &mut ctx.rng))
            .params(lambda::schema())
            .intensity(|p, _, _| lambda::intensity(p))
            .check(|p, env| env.lambdas.check(p)),
        AudioOp::new("change_volume", |a, p, _| ops::change_volume(a, p.f64("volume_db")?))
            .param(ParamDecl::float("volume_db", -100.0, 100.0, 6.0))
            .intensity(|p, _, _| Ok(saturating(p.f64("volume_db")?, 40.0))),
        AudioOp::new("clicks", |a, p, _| ops::clicks(a, p.f64("seconds_between_clicks")?, p.f64("amplitude")?))
            .param(ParamDecl::positive("seconds_between_clicks", 60.0, 0.5))
            .param(ParamDecl::float("amplitude", 0.0, 1.0, 0.5))
            .intensity(|p, _, _| Ok(fraction(p.f64("amplitude")?))),
        AudioOp::new("clip", |a, p, _| ops::clip(a, p.f64("offset_factor")?, p.f64("duration_factor")?))
            .param(ParamDecl::float("offset_factor", 0.0, 1.0, 0.0).open_max())
            .param(ParamDecl::positive("duration_factor", 1.0, 0.5))
            .intensity(|p, _, _| Ok(fraction(1.0 - p.f64("duration_factor")?))),
        AudioOp::new("harmonic", |a, p, _| ops::hpss(a, Component::Harmonic, p.usize("kernel_size")?))
            .param(ParamDecl::int("kernel_size", 1, 101, HPSS_KERNEL as i64))
            .check(|p, _| odd_kernel(p)),
        AudioOp::new("high_pass_filter", |a, p, _| {
            ops::filter(a, &Biquad::high_pass(p.f64("cutoff_hz")?, p.f64("q")?, a.sample_rate())?)
        })
        .param(ParamDecl::positive("cutoff_hz", 1e6, 3000.0))
        .param(ParamDecl::positive("q", 100.0, std::f64::consts::FRAC_1_SQRT_2))
        .intensity(|p, s, _| Ok(fraction(p.f64("cutoff_hz")? / nyquist("high_pass_filter", s)?))),
        AudioOp::new("insert_in_background", |a, p, ctx| {
            let bg = match background(p)? {
                Some(b) => b,
                None => ops::white_noise(a.num_channels(), a.len(), 0.03, a.sample_rate(), &ctx.rng)?,
            };
            ops::insert_in_background(a, &bg, p.f64("offset_factor")?)
        })
        .param(ParamDecl::text("background_audio", "").optional())
        .param(ParamDecl::float("offset_factor", 0.0, 1.0, 0.0)),
        AudioOp::new("invert_channels", |a, _, _| ops::invert_channels(a)).intensity(|_, s, _| Ok(multichannel(s))),
        AudioOp::new("loop", |a, p, _| ops::loop_audio(a, p.usize("n")?))
            .param(ParamDecl::int("n", 0, 1000, 1))
            .intensity(|p, _, _| Ok(saturating(p.f64("n")?, 10.0))),
        AudioOp::new("low_pass_filter", |a, p, _| {
            ops::filter(a, &Biquad::low_pass(p.f64("cutoff_hz")?, p.f64("q")?, a.sample_rate())?)
        })
        .param(ParamDecl::positive("cutoff_hz", 1e6, 500.0))
        .param(ParamDecl::positive("q", 100.0, std::f64::consts::FRAC_1_SQRT_2))
        .intensity(|p, s, _| Ok(fraction(1.0 - p.f64("cutoff_hz")? / nyquist("low_pass_filter", s)?))),
        AudioOp::new("normalize", |a, p, _| ops::normalize(a, p.f64("target_peak")?))
            .param(ParamDecl::positive("target_peak", 1.0, 1.0)),
        AudioOp::new("peaking_equalizer", |a, p, _| {
            ops::filter(a, &Biquad::peaking(p.f64("center_hz")?, p.f64("q")?, p.f64("gain_db")?, a.sample_rate())?)
        })
        .param(ParamDecl::positive("center_hz", 1e6, 500.0))
        .param(ParamDecl::positive("q", 100.0, 1.0))
        .param(ParamDecl::float("gain_db", -60.0, 60.0, -3.0))
        .intensity(|p, _, _| Ok(saturating(p.f64("gain_db")?, 24.0))),
        AudioOp::new("percussive", |a, p, _| ops::hpss(a, Component::Percussive, p.usize("kernel_size")?))
            .param(ParamDecl::int("kernel_size", 1, 101, HPSS_KERNEL as i64))
            .check(|p, _| odd_kernel(p)),
        AudioOp::new("pitch_shift", |a, p, _| ops::pitch_shift(a, p.f64("n_semitones")?))
            .param(ParamDecl::float("n_semitones", -24.0, 24.0, 1.0))
            .intensity(|p, _, _| Ok(saturating(p.f64("n_semitones")?, 24.0))),
        AudioOp::new("reverb", |a, p, _| {
            ops::reverb(a, p.f64("room_size")? / 100.0, p.f64("damping")? / 100.0, p.f64("wet_level")?)
        })
        .param(ParamDecl::float("room_size", 0.0, 100.0, 50.0))
        .param(ParamDecl::float("damping", 0.0, 100.0, 50.0))
        .param(ParamDecl::float("wet_level", 0.0, 1.0, 0.3))
        .intensity(|p, _, _| Ok(fraction(p.f64("wet_level")?))),
        AudioOp::new("speed", |a, p, _| ops::speed(a, p.f64("factor")?))
            .param(ParamDecl::positive("factor", 10.0, 2.0))
            .intensity(|p, _, _| Ok(log2_factor(p.f64("factor")?))),
        AudioOp::new("tempo", |a, p, _| ops::time_stretch(a, p.f64("factor")?))
            .param(ParamDecl::positive("factor", 10.0, 2.0))
            .intensity(|p, _, _| Ok(log2_factor(p.f64("factor")?))),
        AudioOp::new("time_stretch", |a, p, _| ops::time_stretch(a, p.f64("rate")?))
            .param(ParamDecl::positive("rate", 10.0, 1.5))
            .intensity(|p, _, _| Ok(log2_factor(p.f64("rate")?))),
        AudioOp::new("to_mono", |a, _, _| ops::to_mono(a)).intensity(|_, s, _| Ok(multichannel(s))),
    ]
}

fn params(v: Value) -> Params {
    serde_json::from_value(v).expect("object literal")
}

/// Params under which a transform returns its input bit for bit.
pub fn identity_params(name: &str) -> Option<Params> {
    Some(match name {
        "apply_lambda" => params(json!({"aug_function": "identity"})),
        "change_volume" => params(json!({"volume_db": 0.0})),
        "clicks" => params(json!({"amplitude": 0.0})),
        "clip" => params(json!({"offset_factor": 0.0, "duration_factor": 1.0})),
        "loop" => params(json!({"n": 0})),
        "reverb" => params(json!({"wet_level": 0.0})),
        "speed" => params(json!({"factor": 1.0})),
        _ => return None,
    })
}

/// Params that leave the input unchanged up to the returned RMS tolerance
/// (STFT round trips and unity filters).
pub fn near_identity_params(name: &str) -> Option<(Params, f64)> {
    Some(match name {
        "pitch_shift" => (params(json!({"n_semitones": 0.0})), 1e-3),
        "tempo" => (params(json!({"factor": 1.0})), 1e-3),
        "time_stretch" => (params(json!({"rate": 1.0})), 1e-3),
        "peaking_equalizer" => (params(json!({"gain_db": 0.0})), 1e-6),
        "add_background_noise" => (params(json!({"snr_level_db": 120.0})), 1e-3),
        _ => return identity_params(name).map(|p| (p, 0.0)),
    })
}
