import logging
from dataclasses import dataclass
from typing import Iterable, List, Tuple

from errors import DuplicateTemplate, EmptyGroundTruth
from template.core import Template, parse_template

logger = logging.getLogger("TemplateMiner")


@dataclass(frozen=True)
class GroundTruth:
    templates: Tuple[Template, ...]

    def __len__(self) -> int:
        return len(self.templates)

    def __iter__(self):
        return iter(self.templates)


def parse_template_lines(lines: Iterable[str], origin: str = "<memory>", unique: bool = True) -> List[Template]:
    """Parse one-template-per-line text; '#' lines and blank lines are skipped.

    With unique=False a repeated template is dropped with a warning instead
    of raising, which suits output files of third-party parsers.
    """
    templates: List[Template] = []
    seen = set()
    for number, line in enumerate(lines, 1):
        text = line.rstrip("\r\n")
        if not text.strip() or text.lstrip().startswith("#"):
            continue
        template = parse_template(text)
        if template.source in seen:
            if unique:
                raise DuplicateTemplate(f"{origin}:{number}: duplicate template {template.source!r}")
            logger.warning(f"{origin}:{number}: skipping repeated template {template.source!r}")
            continue
        seen.add(template.source)
        templates.append(template)
    return templates


def load_templates(path: str, unique: bool = True) -> List[Template]:
    with open(path, "r", encoding="utf-8", newline="") as handle:
        return parse_template_lines(handle, origin=path, unique=unique)


def load_ground_truth(path: str) -> GroundTruth:
    templates = load_templates(path)
    if not templates:
        raise EmptyGroundTruth(f"{path} contains no templates")
    logger.info(f"Loaded {len(templates)} ground truth templates from {path}")
    return GroundTruth(templates=tuple(templates))
