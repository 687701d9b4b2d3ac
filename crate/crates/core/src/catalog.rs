//! Transform registries and the machinery that applies them: probability
//! coins, parameter resolution, composition and metadata emission.

use std::collections::HashMap;

use crate::params::{self, ParamDecl};
use crate::spec::{Node, Pipeline, TransformSpec, COMPOSE};
use crate::{Error, Params, Result, Rng, Shape, TransformMetadata};

/// A data modality (image, audio, text, video).
pub trait Modality: Sized + Send + Sync + 'static {
    type Datum: Clone + Send + Sync;
    /// Read-only resources shared by every transform (assets, callbacks).
    type Env: Send + Sync;
    const NAME: &'static str;

    fn shape(datum: &Self::Datum) -> Shape;
}

/// Per-application context handed to a transform.
pub struct OpCtx<'a, M: Modality> {
    pub rng: Rng,
    pub env: &'a M::Env,
    nested: Vec<TransformMetadata>,
}

impl<'a, M: Modality> OpCtx<'a, M> {
    pub fn new(rng: Rng, env: &'a M::Env) -> Self {
        Self {
            rng,
            env,
            nested: Vec::new(),
        }
    }

    /// Attaches metadata of a nested pipeline run by this transform.
    pub fn record_nested(&mut self, meta: Vec<TransformMetadata>) {
        self.nested.extend(meta);
    }
}

pub type ApplyFn<M> =
    fn(&<M as Modality>::Datum, &Params, &mut OpCtx<'_, M>) -> Result<<M as Modality>::Datum>;
/// Maps resolved params (and the source shape, when known) to a strength score.
pub type IntensityFn<M> = fn(&Params, Option<&Shape>, &<M as Modality>::Env) -> Result<f64>;
/// Cross-field validation on concrete params; runs before any work is done.
pub type CheckFn<M> = fn(&Params, &<M as Modality>::Env) -> Result<()>;

pub struct OpDef<M: Modality> {
    pub name: &'static str,
    pub schema: Vec<ParamDecl>,
    pub intensity: IntensityFn<M>,
    pub apply: ApplyFn<M>,
    pub check: Option<CheckFn<M>>,
}

fn full_intensity<M: Modality>(_: &Params, _: Option<&Shape>, _: &M::Env) -> Result<f64> {
    Ok(100.0)
}

impl<M: Modality> OpDef<M> {
    pub fn new(name: &'static str, apply: ApplyFn<M>) -> Self {
        Self {
            name,
            schema: Vec::new(),
            intensity: full_intensity::<M>,
            apply,
            check: None,
        }
    }

    pub fn param(mut self, decl: ParamDecl) -> Self {
        self.schema.push(decl);
        self
    }

    pub fn params(mut self, decls: impl IntoIterator<Item = ParamDecl>) -> Self {
        self.schema.extend(decls);
        self
    }

    pub fn intensity(mut self, f: IntensityFn<M>) -> Self {
        self.intensity = f;
        self
    }

    pub fn check(mut self, f: CheckFn<M>) -> Self {
        self.check = Some(f);
        self
    }

    /// Fills defaults for a spec that holds no random descriptors.
    pub fn defaults_for(&self, params: &Params) -> Result<Params> {
        params::resolve(self.name, &self.schema, params, &Rng::new(0))
    }
}

pub struct Catalog<M: Modality> {
    ops: Vec<OpDef<M>>,
    index: HashMap<&'static str, usize>,
}

impl<M: Modality> Catalog<M> {
    pub fn new(ops: Vec<OpDef<M>>) -> Self {
        let mut index = HashMap::with_capacity(ops.len());
        for (i, op) in ops.iter().enumerate() {
            let dup = index.insert(op.name, i);
            assert!(dup.is_none(), "duplicate {} transform `{}`", M::NAME, op.name);
            assert!(op.name != COMPOSE, "`compose` is reserved");
        }
        Self { ops, index }
    }

    pub fn get(&self, name: &str) -> Result<&OpDef<M>> {
        self.index
            .get(name)
            .map(|&i| &self.ops[i])
            .ok_or_else(|| Error::UnknownTransform {
                modality: M::NAME,
                name: name.to_string(),
            })
    }

    pub fn contains(&self, name: &str) -> bool {
        self.index.contains_key(name)
    }

    pub fn names(&self) -> impl Iterator<Item = &'static str> + '_ {
        self.ops.iter().map(|o| o.name)
    }

    pub fn iter(&self) -> impl Iterator<Item = &OpDef<M>> {
        self.ops.iter()
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }
}

/// Stream indices under a transform's own stream.
const PARAM_STREAM: u64 = 0;
const OP_STREAM: u64 = 1;

/// Applies specs and pipelines of one modality against a catalog and env.
pub struct Augmenter<'a, M: Modality> {
    catalog: &'a Catalog<M>,
    env: &'a M::Env,
}

impl<'a, M: Modality> Clone for Augmenter<'a, M> {
    fn clone(&self) -> Self {
        *self
    }
}

impl<'a, M: Modality> Copy for Augmenter<'a, M> {}

impl<'a, M: Modality> Augmenter<'a, M> {
    pub fn new(catalog: &'a Catalog<M>, env: &'a M::Env) -> Self {
        Self { catalog, env }
    }

    pub fn catalog(&self) -> &'a Catalog<M> {
        self.catalog
    }

    pub fn env(&self) -> &'a M::Env {
        self.env
    }

    pub fn validate_spec(&self, spec: &TransformSpec) -> Result<()> {
        spec.check_probability()?;
        let op = self.catalog.get(&spec.name)?;
        params::validate(op.name, &op.schema, &spec.params)?;
        if let Some(check) = op.check {
            if params::is_resolved(&op.schema, &spec.params) {
                check(&op.defaults_for(&spec.params)?, self.env)?;
            }
        }
        Ok(())
    }

    pub fn validate(&self, pipeline: &Pipeline) -> Result<()> {
        Pipeline::check_probabilities(&pipeline.children)?;
        self.validate_nodes(&pipeline.children)
    }

    fn validate_nodes(&self, nodes: &[Node]) -> Result<()> {
        for node in nodes {
            match node {
                Node::Transform(spec) => self.validate_spec(spec)?,
                Node::Compose { children, .. } => self.validate_nodes(children)?,
            }
        }
        Ok(())
    }

    /// Applies the pipeline's children in order; child `i` draws only from
    /// `rng.derive(i)`. Validation of the whole pipeline happens first, and
    /// on any error the caller's input is left as it was.
    pub fn compose(
        &self,
        pipeline: &Pipeline,
        input: &M::Datum,
        rng: &Rng,
    ) -> Result<(M::Datum, Vec<TransformMetadata>)> {
        self.validate(pipeline)?;
        self.run_nodes(&pipeline.children, input, rng)
    }

    fn run_nodes(
        &self,
        nodes: &[Node],
        input: &M::Datum,
        rng: &Rng,
    ) -> Result<(M::Datum, Vec<TransformMetadata>)> {
        let mut current = input.clone();
        let mut metadata = Vec::with_capacity(nodes.len());
        for (i, node) in nodes.iter().enumerate() {
            let mut child_rng = rng.derive(i as u64);
            let (next, meta) = match node {
                Node::Transform(spec) => self.apply_validated(spec, &current, &mut child_rng)?,
                Node::Compose { children, p } => {
                    self.apply_compose_node(children, *p, &current, &mut child_rng)?
                }
            };
            current = next;
            metadata.push(meta);
        }
        Ok((current, metadata))
    }

    fn apply_compose_node(
        &self,
        children: &[Node],
        p: f64,
        input: &M::Datum,
        rng: &mut Rng,
    ) -> Result<(M::Datum, TransformMetadata)> {
        let coin = rng.next_f64();
        let src_shape = M::shape(input);
        if coin >= p {
            return Ok((input.clone(), skipped(COMPOSE, Params::new(), src_shape)));
        }
        let (out, children) = self.run_nodes(children, input, &rng.derive(OP_STREAM))?;
        let intensity = children.iter().map(|m| m.intensity).fold(0.0, f64::max);
        let meta = TransformMetadata {
            name: COMPOSE.into(),
            params: Params::new(),
            intensity,
            applied: true,
            src_shape,
            dst_shape: M::shape(&out),
            children,
        };
        Ok((out, meta))
    }

    /// Draws exactly one coin from `rng`; when it is below `spec.p` the
    /// transform runs on streams derived from `rng`, otherwise the input is
    /// returned untouched with `applied = false`.
    pub fn apply_with_probability(
        &self,
        spec: &TransformSpec,
        input: &M::Datum,
        rng: &mut Rng,
    ) -> Result<(M::Datum, TransformMetadata)> {
        self.validate_spec(spec)?;
        self.apply_validated(spec, input, rng)
    }

    fn apply_validated(
        &self,
        spec: &TransformSpec,
        input: &M::Datum,
        rng: &mut Rng,
    ) -> Result<(M::Datum, TransformMetadata)> {
        let op = self.catalog.get(&spec.name)?;
        let coin = rng.next_f64();
        let resolved = params::resolve(op.name, &op.schema, &spec.params, &rng.derive(PARAM_STREAM))?;
        let src_shape = M::shape(input);
        if coin >= spec.p {
            return Ok((input.clone(), skipped(op.name, resolved, src_shape)));
        }
        if let Some(check) = op.check {
            check(&resolved, self.env)?;
        }
        let mut ctx = OpCtx::new(rng.derive(OP_STREAM), self.env);
        let out = (op.apply)(input, &resolved, &mut ctx)?;
        let intensity = (op.intensity)(&resolved, Some(&src_shape), self.env)?.clamp(0.0, 100.0);
        let meta = TransformMetadata {
            name: op.name.into(),
            params: resolved,
            intensity,
            applied: true,
            src_shape,
            dst_shape: M::shape(&out),
            children: ctx.nested,
        };
        Ok((out, meta))
    }

    /// Runs a transform with already-resolved params, bypassing the coin.
    pub fn apply_resolved(
        &self,
        name: &str,
        resolved: &Params,
        input: &M::Datum,
        rng: Rng,
    ) -> Result<M::Datum> {
        let op = self.catalog.get(name)?;
        let mut ctx = OpCtx::new(rng, self.env);
        (op.apply)(input, resolved, &mut ctx)
    }

    /// Resolves a spec's params (defaults and random draws) without applying it.
    pub fn resolve(&self, spec: &TransformSpec, rng: &Rng) -> Result<Params> {
        let op = self.catalog.get(&spec.name)?;
        params::resolve(op.name, &op.schema, &spec.params, rng)
    }

    /// Strength of a fully specified transform, in `[0, 100]`.
    pub fn intensity(&self, spec: &TransformSpec) -> Result<f64> {
        self.validate_spec(spec)?;
        let op = self.catalog.get(&spec.name)?;
        if !params::is_resolved(&op.schema, &spec.params) {
            return Err(Error::Intensity {
                op: op.name.into(),
                reason: "params still hold random descriptors".into(),
            });
        }
        let resolved = op.defaults_for(&spec.params)?;
        Ok((op.intensity)(&resolved, None, self.env)?.clamp(0.0, 100.0))
    }
}

fn skipped(name: &str, params: Params, shape: Shape) -> TransformMetadata {
    TransformMetadata {
        name: name.into(),
        params,
        intensity: 0.0,
        applied: false,
        dst_shape: shape.clone(),
        src_shape: shape,
        children: Vec::new(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::intensity;
    use serde_json::json;

    /// A toy modality over integer vectors.
    struct Ints;

    impl Modality for Ints {
        type Datum = Vec<i64>;
        type Env = ();
        const NAME: &'static str = "ints";

        fn shape(d: &Vec<i64>) -> Shape {
            Shape::Text {
                chars: d.len(),
                words: d.len(),
            }
        }
    }

    fn add(d: &Vec<i64>, p: &Params, _: &mut OpCtx<'_, Ints>) -> Result<Vec<i64>> {
        let k = p.i64("k")?;
        Ok(d.iter().map(|x| x + k).collect())
    }

    fn reverse(d: &Vec<i64>, _: &Params, _: &mut OpCtx<'_, Ints>) -> Result<Vec<i64>> {
        Ok(d.iter().rev().copied().collect())
    }

    fn noise(d: &Vec<i64>, _: &Params, ctx: &mut OpCtx<'_, Ints>) -> Result<Vec<i64>> {
        Ok(d.iter().map(|x| x + ctx.rng.below(100) as i64).collect())
    }

    fn fail(_: &Vec<i64>, _: &Params, _: &mut OpCtx<'_, Ints>) -> Result<Vec<i64>> {
        Err(Error::failed("fail", "always"))
    }

    fn catalog() -> Catalog<Ints> {
        Catalog::new(vec![
            OpDef::new("add", add)
                .param(ParamDecl::int("k", -100, 100, 0))
                .intensity(|p, _, _| Ok(intensity::saturating(p.i64("k")?.abs() as f64, 10.0))),
            OpDef::new("reverse", reverse),
            OpDef::new("noise", noise),
            OpDef::new("fail", fail),
        ])
    }

    #[test]
    fn empty_pipeline_is_identity() {
        let cat = catalog();
        let aug = Augmenter::new(&cat, &());
        let (out, meta) = aug.compose(&Pipeline::new(), &vec![1, 2, 3], &Rng::new(1)).unwrap();
        assert_eq!(out, vec![1, 2, 3]);
        assert!(meta.is_empty());
    }

    #[test]
    fn involution_pair() {
        let cat = catalog();
        let aug = Augmenter::new(&cat, &());
        let p = Pipeline::of([TransformSpec::new("reverse"), TransformSpec::new("reverse")]);
        let (out, meta) = aug.compose(&p, &vec![1, 2, 3], &Rng::new(1)).unwrap();
        assert_eq!(out, vec![1, 2, 3]);
        assert_eq!(meta.len(), 2);
        assert!(meta.iter().all(|m| m.applied));
    }

    #[test]
    fn probability_extremes() {
        let cat = catalog();
        let aug = Augmenter::new(&cat, &());
        for seed in 0..20 {
            let never = TransformSpec::new("reverse").with_p(0.0);
            let (out, m) = aug.apply_with_probability(&never, &vec![1, 2], &mut Rng::new(seed)).unwrap();
            assert_eq!(out, vec![1, 2]);
            assert!(!m.applied);
            assert_eq!(m.src_shape, m.dst_shape);
            let always = TransformSpec::new("reverse").with_p(1.0);
            let (out, m) = aug.apply_with_probability(&always, &vec![1, 2], &mut Rng::new(seed)).unwrap();
            assert_eq!(out, vec![2, 1]);
            assert!(m.applied);
        }
    }

    #[test]
    fn coin_is_always_drawn() {
        let cat = catalog();
        let aug = Augmenter::new(&cat, &());
        for p in [0.0, 0.5, 1.0] {
            let mut rng = Rng::new(3);
            aug.apply_with_probability(&TransformSpec::new("reverse").with_p(p), &vec![1], &mut rng)
                .unwrap();
            let mut reference = Rng::new(3);
            reference.next_f64();
            assert_eq!(rng, reference);
        }
    }

    #[test]
    fn half_probability_is_seed_stable() {
        let cat = catalog();
        let aug = Augmenter::new(&cat, &());
        let spec = TransformSpec::new("reverse").with_p(0.5);
        let mut applied = 0;
        for seed in 0..200 {
            let a = aug.apply_with_probability(&spec, &vec![1, 2], &mut Rng::new(seed)).unwrap();
            let b = aug.apply_with_probability(&spec, &vec![1, 2], &mut Rng::new(seed)).unwrap();
            assert_eq!(a, b);
            applied += a.1.applied as usize;
        }
        assert!((60..140).contains(&applied), "applied {applied} of 200");
    }

    #[test]
    fn sibling_isolation() {
        let cat = catalog();
        let aug = Augmenter::new(&cat, &());
        let rand_k = json!({"randint": [-50, 50]});
        let a = Pipeline::of([
            TransformSpec::new("add").with("k", rand_k.clone()),
            TransformSpec::new("add").with("k", 3),
            TransformSpec::new("add").with("k", rand_k.clone()).with_p(0.7),
        ]);
        let mut b = a.clone();
        b.children[1] = TransformSpec::new("add").with("k", 9).into();
        let (_, ma) = aug.compose(&a, &vec![0], &Rng::new(11)).unwrap();
        let (_, mb) = aug.compose(&b, &vec![0], &Rng::new(11)).unwrap();
        assert_eq!(ma[0].params, mb[0].params);
        assert_eq!(ma[2].params, mb[2].params);
        assert_eq!(ma[2].applied, mb[2].applied);
        assert_ne!(ma[1].params, mb[1].params);
    }

    #[test]
    fn validation_is_fail_fast() {
        let cat = catalog();
        let aug = Augmenter::new(&cat, &());
        let p = Pipeline::of([TransformSpec::new("add").with("k", 1), TransformSpec::new("nope")]);
        let err = aug.compose(&p, &vec![0], &Rng::new(0)).unwrap_err();
        assert!(matches!(err, Error::UnknownTransform { .. }));
        let p = Pipeline::of([TransformSpec::new("add").with("k", 1000)]);
        assert!(aug.compose(&p, &vec![0], &Rng::new(0)).unwrap_err().is_validation());
        let p = Pipeline::of([TransformSpec::new("add").with_p(1.5)]);
        assert!(aug.compose(&p, &vec![0], &Rng::new(0)).is_err());
    }

    #[test]
    fn runtime_error_propagates_only_when_applied() {
        let cat = catalog();
        let aug = Augmenter::new(&cat, &());
        let skip = Pipeline::of([TransformSpec::new("fail").with_p(0.0)]);
        assert!(aug.compose(&skip, &vec![0], &Rng::new(0)).is_ok());
        let run = Pipeline::of([TransformSpec::new("fail")]);
        assert!(aug.compose(&run, &vec![0], &Rng::new(0)).is_err());
    }

    #[test]
    fn nested_compose_metadata() {
        let cat = catalog();
        let aug = Augmenter::new(&cat, &());
        let inner = Pipeline::of([TransformSpec::new("add").with("k", 5), TransformSpec::new("noise")]);
        let p = Pipeline::new().then(inner).then(TransformSpec::new("reverse"));
        let (out, meta) = aug.compose(&p, &vec![0, 0], &Rng::new(2)).unwrap();
        assert_eq!(meta.len(), 2);
        assert_eq!(meta[0].name, "compose");
        assert_eq!(meta[0].children.len(), 2);
        assert_eq!(meta[0].intensity, 100.0);
        assert_eq!(meta[0].children[0].intensity, 50.0);
        let (again, _) = aug.compose(&p, &vec![0, 0], &Rng::new(2)).unwrap();
        assert_eq!(out, again);
    }

    #[test]
    fn intensity_requires_resolved_params() {
        let cat = catalog();
        let aug = Augmenter::new(&cat, &());
        assert_eq!(aug.intensity(&TransformSpec::new("add")).unwrap(), 0.0);
        assert_eq!(aug.intensity(&TransformSpec::new("add").with("k", 20)).unwrap(), 100.0);
        let random = TransformSpec::new("add").with("k", json!({"randint": [0, 3]}));
        assert!(matches!(aug.intensity(&random), Err(Error::Intensity { .. })));
    }
}
