"""Synthetic corpus recipe configuration management."""

from itertools import combinations
from pathlib import Path
from typing import Any, Dict, List, Literal, Tuple

from pydantic import BaseModel, Field, ValidationError, model_validator

from app.configs import BaseConfig
from app.dataset import ClassLabel

MIN_HUE_SEPARATION = 40.0


class RecipeEntry(BaseModel):
    """Colour and texture statistics of one synthetic stone class."""

    label: ClassLabel
    base_hue: float = Field(..., ge=0.0, lt=360.0)
    hue_jitter: float = Field(..., ge=0.0)
    saturation: Tuple[float, float]
    value: Tuple[float, float]
    texture: Literal["smooth", "fine-grain", "blotchy", "striped"]
    texture_scale: int = Field(..., ge=1)

    @model_validator(mode="after")
    def validate_ranges(self) -> "RecipeEntry":
        lo, hi = self.saturation
        if not (0.0 <= lo <= hi <= 1.0):
            raise ValueError("saturation must be an ordered range within [0, 1]")
        lo, hi = self.value
        if not (0.0 <= lo <= hi <= 255.0):
            raise ValueError("value must be an ordered range within [0, 255]")
        return self


def hue_distance(a: float, b: float) -> float:
    """Angular distance between two hues in degrees."""
    d = abs(a - b) % 360.0
    return min(d, 360.0 - d)


def _configured_recipes_file() -> Path:
    from app.config_loader import config_loader

    return config_loader.get_recipes_file()


class RecipesConfig(BaseConfig):
    """Synthetic corpus recipes management."""

    description = "recipes"
    sort_keys = False

    def __init__(self, config_dir: Path | None = None, file_name: str = "recipes.yml"):
        super().__init__(config_dir, file_name, locate=_configured_recipes_file)

    def validate(self, config: Dict[str, Any]) -> List[str]:
        """Validate the recipes.

        Every class needs exactly one recipe, and any two recipes must differ by
        at least 40 degrees of hue or use different texture kinds.
        """
        errors = []
        entries = config.get("recipes")
        if not isinstance(entries, list):
            return ["recipes must be a list"]

        parsed: List[RecipeEntry] = []
        for i, entry in enumerate(entries):
            if not isinstance(entry, dict):
                errors.append(f"Recipe {i} must be a dictionary")
                continue
            try:
                parsed.append(RecipeEntry(**entry))
            except ValidationError as e:
                for err in e.errors():
                    location = ".".join(str(part) for part in err["loc"]) or "recipe"
                    errors.append(f"Recipe {i} {location}: {err['msg']}")

        labels = [recipe.label for recipe in parsed]
        for label in ClassLabel:
            if labels.count(label) != 1:
                errors.append(f"Class {label.value} needs exactly one recipe, found {labels.count(label)}")

        for a, b in combinations(parsed, 2):
            if hue_distance(a.base_hue, b.base_hue) < MIN_HUE_SEPARATION and a.texture == b.texture:
                errors.append(
                    f"Recipes {a.label.value} and {b.label.value} share texture '{a.texture}' "
                    f"and are less than {MIN_HUE_SEPARATION:.0f} degrees of hue apart"
                )
        return errors

    def recipes(self) -> List[RecipeEntry]:
        """Load, validate and return the recipes in canonical class order.

        Raises:
            ValueError: If the recipes file does not validate.
        """
        config = self.load_validated()
        parsed = [RecipeEntry(**entry) for entry in config["recipes"]]
        return sorted(parsed, key=lambda recipe: recipe.label.position)
