"""Exception types raised across the pipeline."""


class BulletinError(Exception):
    """Base class for every error raised by bulletinkit."""


class IngestError(BulletinError):
    """An input artifact could not be read.

    ``reason`` is one of ``corrupt``, ``encrypted``, ``bad_grid_row``,
    ``bad_hint``.
    """

    def __init__(self, reason: str, message: str = "", line: int | None = None):
        self.reason = reason
        self.line = line
        where = f" (line {line})" if line is not None else ""
        super().__init__(f"{reason}{where}: {message}" if message else f"{reason}{where}")


class ConfigError(BulletinError):
    pass


class GenError(BulletinError):
    """Fixture generation constraints cannot be satisfied."""


class AmbiguousMatch(BulletinError):
    def __init__(self, table_id: str, n_matches: int):
        self.table_id = table_id
        self.n_matches = n_matches
        super().__init__(f"{n_matches} grids match schema table {table_id!r}")


class CoercionError(BulletinError):
    def __init__(self, text: str, kind: str, where: str = ""):
        self.text = text
        self.kind = kind
        self.where = where
        super().__init__(f"cannot read {text!r} as {kind}" + (f" at {where}" if where else ""))


class SchemaDriftError(BulletinError):
    pass


class ReportError(BulletinError):
    def __init__(self, reason: str, message: str = ""):
        self.reason = reason
        super().__init__(f"{reason}: {message}" if message else reason)
