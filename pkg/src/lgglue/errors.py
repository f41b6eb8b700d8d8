"""Error type shared by all modules; ``code`` is a stable machine-readable tag."""


class LgError(Exception):
    def __init__(self, code: str, message: str = ""):
        super().__init__(f"{code}: {message}" if message else code)
        self.code = code
        self.message = message
