code = compile("pass", "<s>", "exec")
