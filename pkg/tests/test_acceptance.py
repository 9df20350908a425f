"""End-to-end acceptance checks for blending, supervision, evaluation and generation."""

import numpy as np
import scipy.ndimage

from patchy.blending import (
    GuidanceField,
    SolverConfig,
    build_guidance,
    fpi_blend,
    pii_blend,
    solve_patch,
)
from patchy.core.generator import GeneratorConfig, generate_corpus, iter_samples, prepare_dataset
from patchy.core.normalize import normalize
from patchy.core.sampler import PatchSampler, SamplerConfig, sample_patch, sample_stream
from patchy.core.schema import ImageGrid, PatchRegion, PatchSpec
from patchy.evaluation import ScoredSample, aggregate_score, average_precision
from patchy.files import save_image
from patchy.supervision import (
    LabelMap,
    ScoreMap,
    bce_loss,
    bce_loss_gradient,
    binary_entropy,
)
from patchy.validators import boundary_jump, system_residual


def make_smooth(rng: np.random.Generator, size: int, sigma: float = 3.0) -> ImageGrid:
    """Smoothed white noise."""
    return ImageGrid(scipy.ndimage.gaussian_filter(rng.normal(size=(size, size)), sigma))


def make_blobs(rng: np.random.Generator, size: int = 64, count: int = 8) -> ImageGrid:
    """Sum of random Gaussian blobs, normalized."""
    rows, cols = np.mgrid[0:size, 0:size]
    image = np.zeros((size, size))
    for _ in range(count):
        r, c = rng.uniform(0, size, size=2)
        width = rng.uniform(8.0, 12.0)
        image += rng.uniform(-1.0, 1.0) * np.exp(
            -((rows - r) ** 2 + (cols - c) ** 2) / (2.0 * width**2)
        )
    return normalize(ImageGrid(image))[0]


def exhaustive_ap(scores: np.ndarray, truth: np.ndarray) -> float:
    positives = truth.sum()
    ap, previous_recall = 0.0, 0.0
    for t in sorted(set(scores.tolist()), reverse=True):
        flagged = scores >= t
        tp = (flagged & truth).sum()
        recall = tp / positives
        ap += (recall - previous_recall) * (tp / flagged.sum())
        previous_recall = recall
    return ap


class TestSolverCorrectness:
    """Iterative and direct solves agree."""

    def test_cg_matches_dense_on_random_patches(self):
        """Test 1000 random patches, 3x3 to 16x16, within 1e-6."""
        rng = np.random.default_rng(101)
        iterative = SolverConfig(rel_tolerance=1e-10)
        dense = SolverConfig(method="direct_dense")
        for _ in range(1000):
            h, w = (int(v) for v in rng.integers(3, 17, size=2))
            height = h + 2 + int(rng.integers(0, 4))
            width = w + 2 + int(rng.integers(0, 4))
            top = int(rng.integers(1, height - h))
            left = int(rng.integers(1, width - w))
            spec = PatchSpec(PatchRegion(top, left, h, w), alpha=0.5)
            dest = ImageGrid(rng.normal(size=(height, width)))
            guidance = GuidanceField(spec.region, rng.normal(size=(4, h, w, 1)))

            a = solve_patch(dest, guidance, spec, iterative).values
            b = solve_patch(dest, guidance, spec, dense).values
            assert np.max(np.abs(a - b)) <= 1e-6


class TestResidualProperty:
    """Generated PII samples solve the patch equations."""

    def test_corpus_residuals(self):
        """Test every sample of a 100-sample 128x128 corpus."""
        rng = np.random.default_rng(202)
        dataset = prepare_dataset([make_smooth(rng, 128) for _ in range(4)])
        config = GeneratorConfig(mode="pii", count=100, seed=202, normalize=False)

        samples = list(iter_samples(dataset, config))
        assert len(samples) == 100
        for sample in samples:
            dest = dataset[sample.spec.dest_index]
            guidance = build_guidance(dest, dataset[sample.spec.source_index], sample.spec)
            assert system_residual(dest, guidance, sample.spec, sample.image) <= 1e-6


class TestIdentities:
    """Alpha 0 and outside-patch identities."""

    def test_random_trials(self):
        """Test 1000 random pairs and patches."""
        rng = np.random.default_rng(303)
        config = SamplerConfig()
        for trial in range(1000):
            dest = ImageGrid(rng.normal(size=(32, 32)))
            source = ImageGrid(rng.normal(1.0, 2.0, size=(32, 32)))
            spec = sample_patch(config, 32, 32, sample_stream(303, trial))
            mask = spec.region.mask(32, 32)

            zero = PatchSpec(spec.region, alpha=0.0)
            assert fpi_blend(dest, source, zero) == dest
            assert np.max(np.abs(pii_blend(dest, source, zero).data - dest.data)) <= 1e-6

            for out in (fpi_blend(dest, source, spec), pii_blend(dest, source, spec)):
                assert np.array_equal(out.data[~mask], dest.data[~mask])


class TestSeamStatistic:
    """PII hides the patch border better than FPI."""

    def test_constant_dest_textured_source(self):
        """Test PII boundary jump <= FPI boundary jump in at least 95% of 50 trials."""
        rng = np.random.default_rng(404)
        config = SamplerConfig()
        wins = 0
        for trial in range(50):
            dest = ImageGrid(np.zeros((48, 48)))
            source = ImageGrid(10.0 + rng.normal(size=(48, 48)))
            spec = sample_patch(config, 48, 48, sample_stream(404, trial))
            pii = boundary_jump(pii_blend(dest, source, spec), spec.region)
            fpi = boundary_jump(fpi_blend(dest, source, spec), spec.region)
            wins += pii <= fpi
        assert wins >= 48


class TestLossGradient:
    """BCE loss and its gradient."""

    def test_gradient_and_minimum(self):
        """Test 100 random map pairs against central differences."""
        rng = np.random.default_rng(505)
        eps = 1e-6
        for _ in range(100):
            label = LabelMap(rng.uniform(0.05, 0.95, size=(4, 4)))
            score = ScoreMap(rng.uniform(0.05, 0.95, size=(4, 4)))
            grad = bce_loss_gradient(label, score)
            numeric = np.zeros_like(grad)
            for idx in np.ndindex(4, 4):
                up = score.data.copy()
                down = score.data.copy()
                up[idx] += eps
                down[idx] -= eps
                numeric[idx] = (
                    bce_loss(label, ScoreMap(up)) - bce_loss(label, ScoreMap(down))
                ) / (2 * eps)
            np.testing.assert_allclose(numeric, grad, rtol=1e-4, atol=1e-8)

            at_label = bce_loss(label, ScoreMap(label.data))
            assert abs(at_label - binary_entropy(label.data).mean()) <= 1e-10


class TestAveragePrecisionOracle:
    """AP against threshold enumeration."""

    def test_random_sets(self):
        """Test 100 random sets of up to 500 samples within 1e-12."""
        rng = np.random.default_rng(606)
        for trial in range(100):
            n = int(rng.integers(1, 501))
            scores = rng.random(n)
            if trial % 2:
                scores = np.round(scores, 1)
            truth = rng.random(n) < 0.3
            truth[int(rng.integers(n))] = True
            samples = [
                ScoredSample(str(i), float(s), bool(t))
                for i, (s, t) in enumerate(zip(scores, truth))
            ]
            ap = average_precision(samples).average_precision
            assert abs(ap - exhaustive_ap(scores, truth)) <= 1e-12

    def test_perfect_separation(self):
        """Test separated scores give exactly 1.0."""
        samples = [ScoredSample(str(i), 0.5 + i / 100, i >= 10) for i in range(20)]
        assert average_precision(samples).average_precision == 1.0


class TestEndToEnd:
    """PII anomalies are detectable by a trivial detector."""

    def test_laplacian_detector_beats_chance(self):
        """Test AP of a mean absolute-Laplacian-deviation detector exceeds 0.5."""
        rng = np.random.default_rng(707)
        train = [make_blobs(rng) for _ in range(20)]
        mean_laplacian = np.mean([np.abs(scipy.ndimage.laplace(x.channel(0))) for x in train], 0)

        normals = [make_blobs(rng) for _ in range(40)]
        pool = [make_blobs(rng) for _ in range(41)]
        sampler = PatchSampler(
            SamplerConfig(size_fraction_range=(0.25, 0.4), alpha_range=(0.8, 0.8), seed=707),
            64,
            64,
            len(pool),
        )
        anomalies = []
        for i in range(40):
            spec = sampler.draw(i)
            anomalies.append(pii_blend(pool[spec.dest_index], pool[spec.source_index], spec))

        maps = [
            np.abs(np.abs(scipy.ndimage.laplace(x.channel(0))) - mean_laplacian)
            for x in normals + anomalies
        ]
        scale = max(float(m.max()) for m in maps)
        samples = [
            ScoredSample(str(i), aggregate_score(ScoreMap(m / scale), "mean"), i >= len(normals))
            for i, m in enumerate(maps)
        ]
        assert average_precision(samples).average_precision > 0.5


class TestDeterminism:
    """Corpora are reproducible byte-for-byte."""

    def test_repeat_and_parallel_runs(self, tmp_path):
        """Test two serial runs and a 4-worker run with seed 1234."""
        rng = np.random.default_rng(808)
        inputs = tmp_path / "in"
        inputs.mkdir()
        for i in range(5):
            save_image(make_smooth(rng, 48), inputs / f"normal_{i}.raw")

        runs = {
            "a": dict(workers=1),
            "b": dict(workers=1),
            "c": dict(workers=4),
        }
        for name, kwargs in runs.items():
            generate_corpus(inputs, tmp_path / name, mode="pii", count=12, seed=1234, **kwargs)

        reference = sorted(p.name for p in (tmp_path / "a").iterdir())
        assert "manifest.json" in reference
        assert len(reference) == 1 + 2 * 12
        for name in ("b", "c"):
            assert sorted(p.name for p in (tmp_path / name).iterdir()) == reference
            for file_name in reference:
                expected = (tmp_path / "a" / file_name).read_bytes()
                assert (tmp_path / name / file_name).read_bytes() == expected
