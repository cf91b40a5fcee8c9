"""Shared exception type carrying a stable machine-readable code."""


class FlexucError(Exception):
    """Domain failure with a dotted code such as ``network.disconnected``.

    The code is part of the public contract (CLI exit-code mapping, tests);
    the message is for humans.
    """

    def __init__(self, code: str, message: str):
        super().__init__(f"[{code}] {message}")
        self.code = code
        self.message = message
