import pyparsing as pp

from utils.exceptions import ParseError

_KEY = pp.Word(pp.alphas + "_", pp.alphanums + "_")
_ASSIGNMENT = _KEY("key") + pp.Suppress("=") + pp.pyparsing_common.number("value") + pp.StringEnd()
_ASSIGNMENT.ignore(pp.python_style_comment)


def parse_key_value(text: str, allowed_keys, source: str | None = None) -> dict:
    """ Parse flat `key=value` text with numeric values.

    :param text: The file content.
    :param allowed_keys: Iterable of accepted key names; anything else is rejected.
    :param source: Optional file name used in diagnostics.
    :return: A dict mapping each key present to its float value.
    """
    allowed = set(allowed_keys)
    values = {}
    for line_number, line in enumerate(text.splitlines(), start=1):
        if not line.split("#", 1)[0].strip():
            continue
        try:
            parsed = _ASSIGNMENT.parse_string(line)
        except pp.ParseException as exc:
            raise ParseError(f"expected 'key=number' ({exc.msg})", line_number, exc.col, source) from exc

        key = parsed["key"]
        column = line.index(key) + 1
        if key not in allowed:
            raise ParseError(
                f"unknown key '{key}'. Valid keys are {', '.join(sorted(allowed))}",
                line_number, column, source,
            )
        if key in values:
            raise ParseError(f"duplicate key '{key}'", line_number, column, source)
        values[key] = float(parsed["value"])

    return values
