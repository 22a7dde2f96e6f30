from thzqs.repl import run

run()
