import numpy as np
import pytest

from tabreg.autograd import Tensor, finite_diff_check
from tabreg.model.config import ModelConfig, TrainConfig
from tabreg.model.regressor import LoreModel
from tabreg.pretrain import LdpModel, PretrainConfig, TransferError, ldp_forward, ldp_loss, pretrain, transfer
from tabreg.pretrain.trainer import ldp_mae
from tabreg.pretrain.transfer import config_mismatch, transfer_study
from tabreg.synth.config import GenConfig
from tabreg.synth.generator import generate_records


@pytest.fixture
def corpus():
    return generate_records(GenConfig(rows_range=(2, 3), cols_range=(2, 3), seed=21), 4, max_pairs=12)


class TestLdpHead:
    def test_zero_head_predicts_zero(self, tiny_model_cfg, corpus):
        model = LdpModel(tiny_model_cfg, seed=0)
        model.pair_head.weight.data[...] = 0.0
        model.pair_head.bias.data[...] = 0.0
        r = corpus[0]
        out = ldp_forward(model, r.words, [(0, 0), (1, 1)], r.image_size)
        assert out.data.tolist() == [[0.0, 0.0], [0.0, 0.0]]

    def test_pairs_follow_word_order(self, tiny_model_cfg, corpus, rng):
        model = LdpModel(tiny_model_cfg, seed=0)
        r = corpus[0]
        n = len(r.words)
        perm = rng.permutation(n)
        inverse = np.argsort(perm)
        pairs = [(0, n - 1), (1, 0), (2, 2)]
        out = ldp_forward(model, r.words, pairs, r.image_size).data
        moved = ldp_forward(model, [r.words[i] for i in perm], [(inverse[a], inverse[b]) for a, b in pairs], r.image_size).data
        assert np.abs(out - moved).max() < 1e-9

    def test_loss(self):
        pred = Tensor(np.zeros((5, 2)))
        target = np.zeros((5, 2))
        target[0, 0] = 0.5
        assert ldp_loss(pred, target).item() == pytest.approx(0.05)
        target[0, 0] = 1.0
        assert ldp_loss(pred, target).item() == pytest.approx(1 / 10)

    def test_gradients(self, tiny_model_cfg, corpus):
        model = LdpModel(tiny_model_cfg, seed=1)
        r = corpus[1]
        pairs = [(l.a, l.b) for l in r.ldp_labels]
        report = finite_diff_check(model, lambda: ldp_loss(ldp_forward(model, r.words, pairs, r.image_size), r.ldp_labels), max_coords=600)
        assert report.worst_rel_error < 1e-4, report


class TestPretrain:
    def test_deterministic(self, tiny_model_cfg, corpus):
        cfg = PretrainConfig(epochs=2, lr=1e-2, seed=3)
        a = pretrain(corpus, tiny_model_cfg, cfg, heldout=corpus[:1])
        b = pretrain(corpus, tiny_model_cfg, cfg, heldout=corpus[:1])
        assert a.history == b.history
        assert a.history[-1]["heldout_mae"] == pytest.approx(ldp_mae(a.model, corpus[:1]))

    def test_needs_labels(self, tiny_model_cfg, corpus):
        bare = [r.model_copy(update={"words": None, "ldp_labels": None}) for r in corpus]
        with pytest.raises(ValueError):
            pretrain(bare, tiny_model_cfg, PretrainConfig(seed=0))


class TestTransfer:
    def test_copies_encoders(self, tiny_model_cfg):
        ldp = LdpModel(tiny_model_cfg, seed=5)
        state = ldp.state_dict()
        model = transfer(state, tiny_model_cfg, tiny_model_cfg, seed=9)
        fresh = LoreModel(tiny_model_cfg, seed=9)
        mine = model.state_dict()
        for name, value in state.items():
            if name.startswith("encoder."):
                suffix = name[len("encoder."):]
                assert np.array_equal(mine["base.encoder." + suffix], value)
                assert np.array_equal(mine["stack.encoder." + suffix], value)
            elif name.startswith("featurizer."):
                assert np.array_equal(mine[name], value)
        for name in ("base.head.weight", "stack.head.bias", "stack_proj.weight"):
            assert np.array_equal(mine[name], fresh.state_dict()[name])

    def test_encoder_function_preserved(self, tiny_model_cfg, rng):
        ldp = LdpModel(tiny_model_cfg, seed=5)
        model = transfer(ldp.state_dict(), tiny_model_cfg, tiny_model_cfg, seed=9)
        x = Tensor(rng.normal(size=(4, tiny_model_cfg.d)))
        assert np.array_equal(model.base.encoder(x).data, ldp.encoder(x).data)

    def test_mismatch(self, tiny_model_cfg):
        other = tiny_model_cfg.model_copy(update={"d": 16, "layers_stack": 2})
        assert len(config_mismatch(tiny_model_cfg, other)) == 2
        with pytest.raises(TransferError) as exc:
            transfer(LdpModel(tiny_model_cfg, 0).state_dict(), tiny_model_cfg, other, seed=0)
        assert any(f.startswith("d ") for f in exc.value.differing_fields)
        assert any(f.startswith("layers_stack") for f in exc.value.differing_fields)

    def test_study_shape(self, tiny_model_cfg, corpus):
        ldp = LdpModel(tiny_model_cfg, seed=5)
        study = transfer_study(corpus[:2], corpus[2:], [0, 1], ldp.state_dict(), tiny_model_cfg, tiny_model_cfg,
                               TrainConfig(epochs=2, seed=0))
        assert len(study.scratch_curves) == len(study.transfer_curves) == 2
        assert len(study.rows()) == 2
        assert study.non_inferior == (study.worst_gap >= -study.margin)


@pytest.fixture(scope="module")
def desk_records():
    cfg = GenConfig(rows_range=(2, 8), cols_range=(2, 8), span_prob=0.1, jitter_sigma=2.0, seed=7)
    records = generate_records(cfg, 2200, max_pairs=64, workers=4)
    return records[:2000], records[2000:]


DESK_MODEL = ModelConfig(d=32, heads=4, layers_base=2, layers_stack=2)


@pytest.mark.slow
class TestDeskScale:
    def test_loss_halves_in_ten_epochs(self, desk_records):
        train_records, heldout = desk_records
        result = pretrain(train_records, DESK_MODEL, PretrainConfig(epochs=10, lr=1e-3, seed=0), heldout=heldout)
        assert result.history[-1]["loss"] <= 0.5 * result.history[0]["loss"]
        assert result.history[-1]["heldout_mae"] < 0.5

    def test_transfer_not_worse_than_scratch(self, desk_records):
        train_records, heldout = desk_records
        ldp = pretrain(train_records, DESK_MODEL, PretrainConfig(epochs=10, lr=1e-3, seed=0)).model
        study = transfer_study(
            [r.as_table() for r in train_records],
            [r.as_table() for r in heldout],
            seeds=[0, 1, 2, 3, 4],
            ldp_state=ldp.state_dict(),
            ldp_cfg=DESK_MODEL,
            model_cfg=DESK_MODEL,
            train_cfg=TrainConfig(epochs=20, lr=1e-3, batch_size=8, seed=0),
            margin=0.01,
        )
        assert study.non_inferior, study.rows()
