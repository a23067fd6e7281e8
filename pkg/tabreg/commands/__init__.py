from . import convert, evaluate, generate, replay, training, validate

COMMAND_MODULES = (generate, training, evaluate, convert, validate, replay)
