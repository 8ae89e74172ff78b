"""The 22 ESI research fields, in canonical order and spelling."""

from __future__ import annotations

from enum import Enum

ALL_FIELDS_LABEL = "ALL"


class FieldId(str, Enum):
    AGRICULTURAL_SCIENCES = "Agricultural Sciences"
    BIOLOGY_BIOCHEMISTRY = "Biology & Biochemistry"
    CHEMISTRY = "Chemistry"
    CLINICAL_MEDICINE = "Clinical Medicine"
    COMPUTER_SCIENCE = "Computer Science"
    ECONOMICS_BUSINESS = "Economics & Business"
    ENGINEERING = "Engineering"
    ENVIRONMENT_ECOLOGY = "Environment/Ecology"
    GEOSCIENCES = "Geosciences"
    IMMUNOLOGY = "Immunology"
    MATERIALS_SCIENCE = "Materials Science"
    MATHEMATICS = "Mathematics"
    MICROBIOLOGY = "Microbiology"
    MOLECULAR_BIOLOGY_GENETICS = "Molecular Biol. & Genetics"
    MULTIDISCIPLINARY = "Multidisciplinary"
    NEUROSCIENCE_BEHAVIOR = "Neuroscience & Behavior"
    PHARMACOLOGY_TOXICOLOGY = "Pharmaco. & Toxicology"
    PHYSICS = "Physics"
    PLANT_ANIMAL_SCIENCE = "Plant & Animal Science"
    PSYCHIATRY_PSYCHOLOGY = "Psychiatry/Psychology"
    SOCIAL_SCIENCES = "Social Sciences, general"
    SPACE_SCIENCE = "Space Science"

    def __str__(self) -> str:
        return self.value

    @classmethod
    def parse(cls, name: str) -> "FieldId":
        """Look up a field by its exact canonical name.

        Raises ValueError for anything else, including near misses.
        """
        try:
            return cls(name.strip())
        except ValueError:
            raise ValueError(f"unknown research field {name!r}") from None


FIELDS: tuple[FieldId, ...] = tuple(FieldId)
FIELD_ORDER = {f: i for i, f in enumerate(FIELDS)}
