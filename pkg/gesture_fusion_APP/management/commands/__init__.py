# One module per gesture-fusion subcommand
