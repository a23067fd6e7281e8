from typing import Literal, Optional

from pydantic import BaseModel, Field, PositiveInt, model_validator


ABLATION_PRESETS = ("1a", "1b", "1c", "1d", "2b")


class ModelConfig(BaseModel):
    d: PositiveInt = Field(default=64, description="feature width")
    heads: PositiveInt = Field(default=4, description="attention heads")
    layers_base: PositiveInt = Field(default=3, description="attention layers in the base regressor")
    layers_stack: PositiveInt = Field(default=3, description="attention layers in the stacking regressor")
    pe_frequency_base: float = Field(default=10000.0, gt=1.0)
    enable_stacking: bool = True
    enable_inter: bool = True
    enable_intra: bool = True
    inter_axis: Literal["ordered", "literal"] = Field(
        default="ordered",
        description="'ordered' penalises the axis the pair is ordered on; 'literal' the cross axis",
    )
    preset: Optional[str] = Field(default=None, description="ablation preset this config came from")

    @model_validator(mode="after")
    def _widths(self) -> "ModelConfig":
        if self.d % 4:
            raise ValueError(f"d must be divisible by 4 for the 2-D position embedding, got {self.d}")
        if self.d % self.heads:
            raise ValueError(f"d={self.d} not divisible by heads={self.heads}")
        return self

    @classmethod
    def for_ablation(cls, name: str, base: Optional["ModelConfig"] = None) -> "ModelConfig":
        """Objective / cascade toggles for the ablation rows.

        1a: no inter, no intra. 1b: inter only. 1c: intra only. 1d: both.
        2b: both losses, no stacking, base depth = base + stack depth.
        """
        base = base or cls()
        if name == "1a":
            update = {"enable_inter": False, "enable_intra": False, "enable_stacking": True}
        elif name == "1b":
            update = {"enable_inter": True, "enable_intra": False, "enable_stacking": True}
        elif name == "1c":
            update = {"enable_inter": False, "enable_intra": True, "enable_stacking": True}
        elif name == "1d":
            update = {"enable_inter": True, "enable_intra": True, "enable_stacking": True}
        elif name == "2b":
            update = {
                "enable_inter": True,
                "enable_intra": True,
                "enable_stacking": False,
                "layers_base": base.layers_base + base.layers_stack,
            }
        else:
            raise ValueError(f"unknown ablation preset {name!r}; choose from {list(ABLATION_PRESETS)}")
        return base.model_copy(update={**update, "preset": name})


class TrainConfig(BaseModel):
    epochs: PositiveInt = 100
    lr: float = Field(default=1e-3, gt=0.0)
    betas: tuple[float, float] = (0.9, 0.999)
    weight_decay: float = Field(default=0.0, ge=0.0)
    lr_milestones: tuple[float, ...] = Field(default=(0.7, 0.9), description="fractions of the run where lr drops")
    lr_factor: float = Field(default=0.1, gt=0.0)
    batch_size: PositiveInt = Field(default=1, description="tables per optimiser step (gradient accumulation)")
    train_fraction: float = Field(default=1.0, gt=0.0, le=1.0)
    eval_every: PositiveInt = 1
    seed: int = Field(description="shuffle + init seed")
