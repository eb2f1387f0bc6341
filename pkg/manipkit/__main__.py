from manipkit.main import app

app(prog_name="manipkit")
