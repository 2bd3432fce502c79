"""
File I/O helpers
INI-style parameter files, CSV frames and atomic output writes
"""

import configparser
import os
import tempfile
from pathlib import Path
from typing import Dict, Iterable, List, Mapping, Tuple, Union

import pandas as pd

from .exceptions import ConfigError, SchemaError
from .logging_config import get_logger

logger = get_logger(__name__)

PathLike = Union[str, os.PathLike]

# Significant digits for every floating point column we export
CSV_FLOAT_FORMAT = "%.6g"


def read_ini(path: PathLike) -> Dict[str, Dict[str, str]]:
    """
    Read a `[section]` / `key = value` file into nested dicts.
    Keys keep their case and only `=` separates a key from its value; duplicate keys or
    sections and lines without `=` are parse errors reported with their line number.
    """
    parser = configparser.ConfigParser(
        interpolation=None,
        strict=True,
        comment_prefixes=("#", ";"),
        inline_comment_prefixes=("#", ";"),
        empty_lines_in_values=False,
        delimiters=("=",),
        default_section="\x00defaults",
    )
    parser.optionxform = str
    try:
        with open(path, "r", encoding="utf-8") as f:
            parser.read_file(f, source=str(path))
    except FileNotFoundError:
        raise ConfigError("file not found", path=str(path))
    except UnicodeDecodeError as e:
        raise ConfigError(f"not valid UTF-8 text ({e.reason})", path=str(path))
    except configparser.MissingSectionHeaderError as e:
        raise ConfigError("key outside of any [section]", path=str(path), line=e.lineno)
    except configparser.DuplicateSectionError as e:
        raise ConfigError(f"duplicate section [{e.section}]", path=str(path), line=e.lineno)
    except configparser.DuplicateOptionError as e:
        raise ConfigError(f"duplicate key '{e.option}' in [{e.section}]", path=str(path), line=e.lineno)
    except configparser.ParsingError as e:
        lineno, text = e.errors[0]
        # configparser hands back the repr of the offending line
        raise ConfigError(f"cannot parse {text}, expected 'key = value'",
                          path=str(path), line=lineno)

    sections = {name: dict(parser.items(name, raw=True)) for name in parser.sections()}
    logger.debug(f"Read {path}: sections {list(sections)}")
    return sections


def _temp_path(target: Path, tag: str) -> str:
    fd, name = tempfile.mkstemp(prefix=f".{target.name}.", suffix=f".{tag}", dir=target.parent)
    os.close(fd)
    return name


def _discard(path: str):
    if os.path.exists(path):
        os.unlink(path)


def write_outputs(directory: PathLike, files: Mapping[str, str]) -> List[Path]:
    """
    Write a run's already-rendered files as one unit.
    Every file is staged to a temp file first, then the temps are renamed over their
    targets. If any step fails, renamed targets are removed, replaced targets get their
    previous content back and the temps are deleted, so the directory is left as it was.
    """
    out = Path(directory)
    out.mkdir(parents=True, exist_ok=True)
    staged: List[Tuple[str, Path]] = []
    backups: List[Tuple[Path, str]] = []
    renamed: List[Path] = []
    try:
        for name, text in files.items():
            target = out / name
            tmp_name = _temp_path(target, "tmp")
            staged.append((tmp_name, target))
            with open(tmp_name, "w", encoding="utf-8", newline="") as f:
                f.write(text)
        for tmp_name, target in staged:
            if target.exists():
                backup = _temp_path(target, "bak")
                os.replace(target, backup)
                backups.append((target, backup))
            os.replace(tmp_name, target)
            renamed.append(target)
    except BaseException:
        for target in renamed:
            target.unlink(missing_ok=True)
        for target, backup in reversed(backups):
            os.replace(backup, target)
        for tmp_name, _ in staged:
            _discard(tmp_name)
        raise

    for _, backup in backups:
        _discard(backup)
    for target in renamed:
        logger.info(f"Wrote {target}")
    return renamed


def frame_to_csv(frame: pd.DataFrame, float_format: str = CSV_FLOAT_FORMAT) -> str:
    """Render a frame with the shared CSV conventions (no index, 6 significant digits, LF)"""
    return frame.to_csv(index=False, float_format=float_format, lineterminator="\n")


def read_csv_checked(path: PathLike, required: Iterable[str]) -> pd.DataFrame:
    """Read a CSV and check that all required columns are present"""
    try:
        frame = pd.read_csv(path, encoding="utf-8", skipinitialspace=True)
    except FileNotFoundError:
        raise SchemaError(f"{path}: file not found")
    except pd.errors.EmptyDataError:
        raise SchemaError(f"{path}: file is empty")
    except pd.errors.ParserError as e:
        raise SchemaError(f"{path}: cannot parse CSV ({e})")

    frame.columns = [str(c).strip() for c in frame.columns]
    missing = [c for c in required if c not in frame.columns]
    if missing:
        raise SchemaError(f"{path}: missing columns {', '.join(missing)}")
    return frame
